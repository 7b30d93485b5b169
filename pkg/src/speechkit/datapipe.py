"""Dynamic items over a manifest, evaluated lazily through a dependency graph."""

from __future__ import annotations

import heapq
import inspect
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .manifest import Manifest

RESERVED_ID = "id"


class PipelineError(ValueError):
    pass


class ProducerError(PipelineError):
    """A dynamic item body raised; carries the example id and item key."""

    def __init__(self, example_id: str, key: str, cause: BaseException):
        self.example_id, self.key = example_id, key
        super().__init__(f"example {example_id!r}, item {key!r}: {type(cause).__name__}: {cause}")


def _as_keys(keys) -> tuple:
    if keys is None:
        return ()
    if isinstance(keys, str):
        return (keys,)
    return tuple(keys)


def takes(*keys: str):
    def deco(fn):
        fn.takes = keys
        return fn
    return deco


def provides(*keys: str):
    def deco(fn):
        fn.provides = keys
        return fn
    return deco


@dataclass(frozen=True)
class DynamicItemSpec:
    """``func`` maps the ``takes`` values to one output, or yields one value per ``provides`` key."""

    takes: tuple
    provides: tuple
    func: Callable
    generator: bool = False

    @classmethod
    def from_func(cls, func: Callable, takes=None, provides=None) -> "DynamicItemSpec":
        t = _as_keys(takes if takes is not None else getattr(func, "takes", None))
        p = _as_keys(provides if provides is not None else getattr(func, "provides", None))
        gen = inspect.isgeneratorfunction(func)
        if not p:
            raise PipelineError(f"{getattr(func, '__name__', func)!r} provides nothing")
        if not gen and len(p) != 1:
            raise PipelineError("a plain function provides exactly one item; use a generator for chains")
        if len(set(p)) != len(p):
            raise PipelineError(f"repeated provides keys {p}")
        return cls(t, p, func, gen)


class Pipeline:
    def __init__(self, manifest: Manifest, specs: Iterable[DynamicItemSpec] = (), output_keys=None):
        self.manifest = manifest
        self.static_keys: set = set()
        for items in manifest.examples.values():
            self.static_keys.update(items)
        self.specs: list[DynamicItemSpec] = []
        self.producer: dict[str, int] = {}  # key -> spec index
        for spec in specs:
            self.add_dynamic_item(spec)
        self.output_keys: list = []
        if output_keys is not None:
            self.set_output_keys(output_keys)

    # -- registration --

    def add_dynamic_item(self, func, takes=None, provides=None) -> "Pipeline":
        spec = func if isinstance(func, DynamicItemSpec) else DynamicItemSpec.from_func(func, takes, provides)
        for key in spec.provides:
            if key == RESERVED_ID or key in self.static_keys or key in self.producer:
                raise PipelineError(f"item {key!r} already has a producer")
        idx = len(self.specs)
        cycle = self._cycle_through(spec, idx)
        if cycle:
            raise PipelineError("dependency cycle: " + " -> ".join(cycle))
        self.specs.append(spec)
        for key in spec.provides:
            self.producer[key] = idx
        return self

    def _cycle_through(self, spec: DynamicItemSpec, idx: int) -> list | None:
        # a cycle must pass through the new spec: search from its inputs back to its outputs
        outputs = set(spec.provides)
        stack = [(k, [*spec.provides[:1], k]) for k in spec.takes]
        seen = set()
        while stack:
            key, path = stack.pop()
            if key in outputs:
                return path
            if key in seen or key not in self.producer:
                continue
            seen.add(key)
            for t in self.specs[self.producer[key]].takes:
                stack.append((t, [*path, t]))
        return None

    def producible(self, key: str) -> bool:
        return key == RESERVED_ID or key in self.static_keys or key in self.producer

    def set_output_keys(self, keys) -> "Pipeline":
        keys = list(_as_keys(keys))
        unknown = [k for k in keys if not self.producible(k)]
        if unknown:
            raise PipelineError(f"unknown output keys {unknown}")
        self.output_keys = keys
        return self

    # -- evaluation --

    def plan(self, keys) -> tuple[list[int], dict[int, int]]:
        """Spec indices to run, in evaluation order, and how many values to pull from each."""
        pulls: dict[int, int] = {}
        todo = list(keys)
        while todo:
            key = todo.pop()
            if key == RESERVED_ID or key in self.static_keys:
                continue
            if key not in self.producer:
                raise PipelineError(f"no producer for item {key!r}")
            idx = self.producer[key]
            spec = self.specs[idx]
            depth = spec.provides.index(key) + 1 if spec.generator else 1
            if idx not in pulls:
                todo.extend(spec.takes)
            pulls[idx] = max(pulls.get(idx, 0), depth)
        # topological order, insertion order among independent specs
        deps = {i: {self.producer[t] for t in self.specs[i].takes if t in self.producer} for i in pulls}
        users: dict[int, list] = {i: [] for i in pulls}
        for i, ds in deps.items():
            for d in ds:
                users[d].append(i)
        pending = {i: len(ds) for i, ds in deps.items()}
        ready = [i for i in pulls if pending[i] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for u in users[i]:
                pending[u] -= 1
                if pending[u] == 0:
                    heapq.heappush(ready, u)
        return order, pulls

    def evaluate(self, example_id: str, keys=None) -> dict:
        if example_id not in self.manifest:
            raise KeyError(f"no example {example_id!r}")
        keys = self.output_keys if keys is None else list(_as_keys(keys))
        static = self.manifest[example_id]
        order, pulls = self.plan(keys)
        values: dict = {}

        def get(key):
            if key == RESERVED_ID:
                return example_id
            if key in values:
                return values[key]
            if key in static:
                return static[key]
            raise PipelineError(f"example {example_id!r} has no item {key!r}")

        for idx in order:
            spec = self.specs[idx]
            args = [get(t) for t in spec.takes]
            if not spec.generator:
                try:
                    values[spec.provides[0]] = spec.func(*args)
                except Exception as e:
                    raise ProducerError(example_id, spec.provides[0], e) from e
                continue
            gen = spec.func(*args)
            for key in spec.provides[: pulls[idx]]:
                try:
                    values[key] = next(gen)
                except StopIteration:
                    raise PipelineError(f"example {example_id!r}: chain stopped before yielding {key!r}") from None
                except Exception as e:
                    raise ProducerError(example_id, key, e) from e
            gen.close()
        return {k: get(k) for k in keys}

    def __len__(self) -> int:
        return len(self.manifest)

    def __iter__(self) -> Iterator[dict]:
        for ex_id in self.manifest:
            yield self.evaluate(ex_id)


class UnknownLabelError(KeyError):
    pass


class CategoricalEncoder:
    """Bijection between labels and ``0..n-1`` in first-seen order."""

    def __init__(self, labels: Iterable = ()):
        self.lab2ind: dict = {}
        self.ind2lab: list = []
        self.frozen = False
        self.update(labels)

    def update(self, labels: Iterable) -> "CategoricalEncoder":
        if self.frozen:
            raise PipelineError("encoder is frozen")
        for label in labels:
            if label not in self.lab2ind:
                self.lab2ind[label] = len(self.ind2lab)
                self.ind2lab.append(label)
        return self

    def freeze(self) -> "CategoricalEncoder":
        self.frozen = True
        return self

    def encode_label(self, label) -> int:
        try:
            return self.lab2ind[label]
        except (KeyError, TypeError):
            raise UnknownLabelError(f"unknown label {label!r}") from None

    def decode_index(self, index: int):
        if isinstance(index, bool) or not isinstance(index, int) or not 0 <= index < len(self.ind2lab):
            raise UnknownLabelError(f"unknown index {index!r}")
        return self.ind2lab[index]

    def encode_sequence(self, labels) -> list[int]:
        return [self.encode_label(x) for x in labels]

    def decode_sequence(self, indices) -> list:
        return [self.decode_index(i) for i in indices]

    def __len__(self) -> int:
        return len(self.ind2lab)


def fit_encoder(p: Pipeline, key: str) -> CategoricalEncoder:
    """Evaluate only ``key`` over the manifest and freeze the resulting encoder."""
    enc = CategoricalEncoder()
    for ex_id in p.manifest:
        enc.update([p.evaluate(ex_id, [key])[key]])
    return enc.freeze()

"""Turn a ConfigNode tree into resolved values.

Top-level keys are resolved in dependency order (file order among
independent keys), so ``!ref`` only ever sees finished values.
"""

from __future__ import annotations

import copy
import heapq
from dataclasses import dataclass, field
from typing import Any

from .errors import FactoryError, RefExprError, ReferenceCycleError
from .nodes import ConfigNode, Mapping, RefExpr, Scalar, Sequence, Tagged, TagKind
from .refexpr import eval_ref_expr, placeholders, split_path
from .registry import FactoryRegistry


@dataclass
class Constructed:
    factory_id: str
    positional: list
    keyword: dict
    product: Any = field(default=None, compare=False)


@dataclass
class Deferred:
    """``!new``/``!name`` whose target is not registered."""

    target: str
    positional: list
    keyword: dict
    kind: str = "new"


class Curried:
    """Product of ``!name``: the factory with some arguments bound."""

    def __init__(self, factory_id: str, fn, positional: list, keyword: dict):
        self.factory_id, self.fn = factory_id, fn
        self.positional, self.keyword = positional, keyword

    def __call__(self, *args, **kwargs):
        return self.fn(list(self.positional) + list(args), {**self.keyword, **kwargs})

    def __repr__(self) -> str:
        return f"Curried({self.factory_id!r}, {self.positional!r}, {self.keyword!r})"


def _deps(node: ConfigNode, out: list) -> list:
    if isinstance(node, RefExpr):
        for p in placeholders(node.expr):
            try:
                out.append(split_path(p)[0])
            except RefExprError:
                out.append(p)
    elif isinstance(node, Tagged):
        _deps(node.args, out)
    elif isinstance(node, Sequence):
        for n in node.items:
            _deps(n, out)
    elif isinstance(node, Mapping):
        for _, n in node.entries:
            _deps(n, out)
    return out


def resolution_order(root: Mapping) -> list:
    """Topological order of top-level keys, ties broken by file order."""
    keys = root.keys()
    index = {k: i for i, k in enumerate(keys)}
    deps = {}
    for k, node in root.entries:
        ds = set()
        for d in _deps(node, []):
            if d not in index:
                raise RefExprError(f"{k}: undefined reference <{d}>")
            ds.add(d)
        deps[k] = ds
    users: dict = {k: [] for k in keys}
    for k, ds in deps.items():
        for d in ds:
            users[d].append(k)
    pending = {k: len(ds) for k, ds in deps.items()}
    ready = [index[k] for k in keys if pending[k] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        k = keys[heapq.heappop(ready)]
        order.append(k)
        for u in users[k]:
            pending[u] -= 1
            if pending[u] == 0:
                heapq.heappush(ready, index[u])
    if len(order) != len(keys):
        raise ReferenceCycleError(_find_cycle({k: deps[k] for k in keys if pending[k] > 0}, keys))
    return order


def _find_cycle(deps: dict, keys: list) -> list:
    # walk from the first stuck key until a node repeats
    start = next(k for k in keys if k in deps)
    path, seen = [start], {start: 0}
    while True:
        nxt = min((d for d in deps[path[-1]] if d in deps), key=keys.index)
        if nxt in seen:
            return path[seen[nxt]:] + [nxt]
        seen[nxt] = len(path)
        path.append(nxt)


def _split_args(value) -> tuple[list, dict]:
    if value is None:
        return [], {}
    if isinstance(value, dict):
        bad = [k for k in value if not isinstance(k, str)]
        if bad:
            raise RefExprError(f"keyword names must be strings, got {bad[0]!r}")
        return [], value
    if isinstance(value, list):
        return value, {}
    return [value], {}


class _Resolver:
    def __init__(self, registry: FactoryRegistry):
        self.registry = registry
        self.env: dict = {}

    def value(self, node: ConfigNode, path: str):
        if isinstance(node, Scalar):
            return node.value
        if isinstance(node, Sequence):
            return [self.value(n, f"{path}[{i}]") for i, n in enumerate(node.items)]
        if isinstance(node, Mapping):
            return {k: self.value(v, f"{path}.{k}") for k, v in node.entries}
        if isinstance(node, RefExpr):
            try:
                return eval_ref_expr(node.expr, self.env)
            except RefExprError as e:
                raise RefExprError(f"{path}: {e}") from None
        return self.tagged(node, path)

    def tagged(self, node: Tagged, path: str):
        if node.tag is TagKind.COPY:
            return copy.deepcopy(self.value(node.args, path))
        if node.tag is TagKind.TUPLE:
            return tuple(self.value(n, f"{path}[{i}]") for i, n in enumerate(node.args.items))
        positional, keyword = _split_args(self.value(node.args, path))
        target = node.target
        if target not in self.registry:
            if node.tag is TagKind.APPLY:
                raise FactoryError(path, target, "!apply target is not registered")
            return Deferred(target, positional, keyword, node.tag.value)
        fn = self.registry[target]
        if node.tag is TagKind.NAME:
            return Constructed(target, positional, keyword, Curried(target, fn, positional, keyword))
        try:
            product = fn(list(positional), dict(keyword))
        except Exception as e:
            raise FactoryError(path, target, f"{type(e).__name__}: {e}") from e
        if node.tag is TagKind.APPLY:
            return product
        return Constructed(target, positional, keyword, product)


def resolve(root: Mapping, registry: FactoryRegistry | None = None) -> dict:
    """Resolve every top-level key. The result keeps file order."""
    resolver = _Resolver(registry if registry is not None else FactoryRegistry())
    for key in resolution_order(root):
        resolver.env[key] = resolver.value(root[key], str(key))
    return {k: resolver.env[k] for k in root.keys()}

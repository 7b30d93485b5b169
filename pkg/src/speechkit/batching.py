"""Zero-padded batches and random / sorted / dynamic batch plans."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

STRATEGIES = ("random", "sorted", "dynamic")


class BatchingError(ValueError):
    pass


@dataclass(frozen=True)
class PaddedData:
    data: np.ndarray  # [B, L_max, ...]
    lengths: np.ndarray  # [B], L_i / L_max

    def unpad(self) -> list[np.ndarray]:
        L = self.data.shape[1]
        return [row[: int(round(rel * L))] for row, rel in zip(self.data, self.lengths)]


class PaddedBatch:
    """Padded numeric items plus plain lists for everything else.

    Items are reachable as attributes or by key: ``batch.sig.data``,
    ``batch["sig"].lengths``, ``batch.id``.
    """

    def __init__(self, items: dict):
        self._items = items

    def __getattr__(self, key):
        try:
            return self.__dict__["_items"][key]
        except KeyError:
            raise AttributeError(key) from None

    def __getitem__(self, key):
        return self._items[key]

    def __contains__(self, key) -> bool:
        return key in self._items

    def keys(self):
        return self._items.keys()

    def __len__(self) -> int:
        return len(self._items["id"])

    def __repr__(self) -> str:
        return f"PaddedBatch(size={len(self)}, keys={list(self._items)})"


def _is_numeric(value) -> bool:
    return isinstance(value, np.ndarray) and value.ndim >= 1 and value.dtype.kind in "biufc"


def pad_batch(examples: list[dict], numeric_keys: Iterable[str] | None = None) -> PaddedBatch:
    """Stack examples, zero-padding the first axis of each numeric item on the right.

    With ``numeric_keys=None`` every key whose values are all numeric arrays
    (ndim >= 1) is padded. If every example of a key is empty the relative
    lengths are all 1.
    """
    if not examples:
        raise BatchingError("cannot pad an empty batch")
    keys = list(examples[0])
    for ex in examples[1:]:
        if set(ex) != set(keys):
            raise BatchingError("examples have different item keys")
    if numeric_keys is None:
        numeric = {k for k in keys if all(_is_numeric(ex[k]) for ex in examples)}
    else:
        numeric = set(numeric_keys)
        missing = numeric - set(keys)
        if missing:
            raise BatchingError(f"numeric keys not in examples: {sorted(missing)}")
    items: dict = {"id": [ex.get("id") for ex in examples]}
    for key in keys:
        if key == "id":
            continue
        if key not in numeric:
            items[key] = [ex[key] for ex in examples]
            continue
        arrays = [np.asarray(ex[key]) for ex in examples]
        if any(a.ndim == 0 for a in arrays):
            raise BatchingError(f"item {key!r} has a 0-d value; nothing to pad")
        tail = arrays[0].shape[1:]
        if any(a.shape[1:] != tail for a in arrays):
            shapes = sorted({a.shape[1:] for a in arrays})
            raise BatchingError(f"item {key!r}: trailing shapes differ {shapes}")
        lens = np.array([a.shape[0] for a in arrays])
        L = int(lens.max())
        data = np.zeros((len(arrays), L, *tail), dtype=np.result_type(*arrays))
        for i, a in enumerate(arrays):
            data[i, : a.shape[0]] = a
        rel = lens / L if L else np.ones(len(arrays))
        items[key] = PaddedData(data, rel.astype(np.float64))
    return PaddedBatch(items)


@dataclass(frozen=True)
class BatchPlan:
    batches: list
    strategy: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __iter__(self) -> Iterator[list]:
        return iter(self.batches)

    def __len__(self) -> int:
        return len(self.batches)

    def ids(self) -> list:
        return [i for b in self.batches for i in b]


def padding_cells(plan: BatchPlan | Iterable[list], lengths: Mapping) -> int:
    """Zero cells along the length axis: sum over batches of ``B * L_max - sum L_i``."""
    total = 0
    for batch in plan:
        if batch:
            ls = [lengths[i] for i in batch]
            total += len(ls) * max(ls) - sum(ls)
    return total


def _chunks(ids: list, size: int) -> list:
    return [ids[i: i + size] for i in range(0, len(ids), size)]


def _sorted_batches(ids: list, lengths: Mapping, size: int) -> list:
    """Ascending chunks, with the one short batch placed where it costs least padding.

    With every batch contiguous in sorted order, only the position of the
    short batch is free; picking the best one makes this plan minimal among
    all plans with the same batch sizes.
    """
    order = sorted(ids, key=lambda i: lengths[i])
    n, r = len(order), len(order) % size
    if r == 0 or n < size:
        return _chunks(order, size)
    s = np.array([lengths[i] for i in order], dtype=np.float64)
    q = n // size
    full_before = s[size - 1: q * size: size]  # max of full batch j when the short one comes later
    full_after = s[size - 1 + r:: size]  # max of full batch j when the short one comes earlier
    before = np.concatenate([[0.0], np.cumsum(full_before)])
    after = np.concatenate([np.cumsum(full_after[::-1])[::-1], [0.0]])
    short = s[np.arange(q + 1) * size + r - 1]
    cost = size * before + r * short + size * after
    p = int(np.flatnonzero(cost == cost.min())[-1])  # ties keep the short batch last
    cut = p * size
    return _chunks(order[:cut], size) + [order[cut: cut + r]] + _chunks(order[cut + r:], size)


def bucket_edges(lengths: Iterable[float], n_buckets: int) -> np.ndarray:
    """Exponentially spaced boundaries from the shortest positive length to the longest."""
    ls = np.asarray(list(lengths), dtype=np.float64)
    pos = ls[ls > 0]
    if pos.size == 0:
        return np.array([0.0, 0.0])
    lo, hi = pos.min(), pos.max()
    if hi == lo or n_buckets == 1:
        return np.array([lo, hi])
    return np.geomspace(lo, hi, n_buckets + 1)


def _dynamic_batches(ids: list, lengths: Mapping, max_elems: float, n_buckets: int, rng: random.Random) -> list:
    edges = bucket_edges((lengths[i] for i in ids), n_buckets)
    buckets: dict[int, list] = {}
    for i in ids:
        b = int(np.searchsorted(edges[1:-1], lengths[i], side="right"))
        buckets.setdefault(b, []).append(i)
    batches = []
    for b in sorted(buckets):
        members = buckets[b]
        rng.shuffle(members)
        cur, cur_max = [], 0
        for i in members:
            new_max = max(cur_max, lengths[i])
            if cur and new_max * (len(cur) + 1) > max_elems:
                batches.append(cur)
                cur, new_max = [], lengths[i]
            cur.append(i)
            cur_max = new_max
        if cur:
            batches.append(cur)
    rng.shuffle(batches)
    return batches


def plan_batches(lengths: Mapping, strategy: str = "random", batch_size: int | None = None,
                 max_elems: float | None = None, n_buckets: int = 8, seed: int = 0) -> BatchPlan:
    """Partition ``lengths`` ids into batches.

    random: seeded shuffle, fixed-size chunks. sorted: ascending length,
    fixed-size chunks. dynamic: exponential length buckets, batches drawn
    within a bucket while ``L_max * count <= max_elems``. No batch is
    dropped.
    """
    ids = list(lengths)
    for i in ids:
        if not (isinstance(lengths[i], (int, float, np.number)) and math.isfinite(lengths[i]) and lengths[i] >= 0):
            raise BatchingError(f"length of {i!r} must be a finite non-negative number")
    rng = random.Random(seed)
    if strategy in ("random", "sorted"):
        if batch_size is None or int(batch_size) != batch_size or batch_size < 1:
            raise BatchingError(f"batch_size must be a positive integer, got {batch_size!r}")
        if strategy == "random":
            rng.shuffle(ids)
            batches = _chunks(ids, batch_size)
        else:
            batches = _sorted_batches(ids, lengths, batch_size)
        params = {"batch_size": batch_size}
    elif strategy == "dynamic":
        if max_elems is None or not max_elems > 0:
            raise BatchingError("dynamic batching needs max_elems > 0")
        if n_buckets < 1:
            raise BatchingError("n_buckets must be >= 1")
        too_long = [i for i in ids if lengths[i] > max_elems]
        if too_long:
            raise BatchingError(f"example {too_long[0]!r} (length {lengths[too_long[0]]}) exceeds max_elems")
        batches = _dynamic_batches(ids, lengths, max_elems, n_buckets, rng)
        params = {"max_elems": max_elems, "n_buckets": n_buckets}
    else:
        raise BatchingError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return BatchPlan(batches, strategy, seed, params)


def iterate_batches(pipeline, plan: BatchPlan, numeric_keys=None, start: int = 0) -> Iterator[tuple[int, PaddedBatch]]:
    """Evaluate and pad each planned batch from ``start`` on; yields ``(index, batch)``."""
    for index in range(start, len(plan.batches)):
        examples = [pipeline.evaluate(ex_id) | {"id": ex_id} for ex_id in plan.batches[index]]
        yield index, pad_batch(examples, numeric_keys)

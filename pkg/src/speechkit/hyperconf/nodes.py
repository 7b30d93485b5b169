"""Immutable parse tree of a configuration document."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterator, Union


class TagKind(enum.Enum):
    NEW = "new"
    NAME = "name"
    REF = "ref"
    COPY = "copy"
    TUPLE = "tuple"
    INCLUDE = "include"
    APPLY = "apply"


@dataclass(frozen=True)
class Mark:
    line: int
    column: int


@dataclass(frozen=True)
class Scalar:
    value: Any
    mark: Mark | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sequence:
    items: tuple
    mark: Mark | None = field(default=None, compare=False, repr=False)

    def __iter__(self) -> Iterator:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Mapping:
    """Ordered key/node pairs. Keys are plain Python scalars."""

    entries: tuple
    mark: Mark | None = field(default=None, compare=False, repr=False)

    def keys(self) -> list:
        return [k for k, _ in self.entries]

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def __contains__(self, key) -> bool:
        return any(k == key for k, _ in self.entries)

    def __getitem__(self, key):
        for k, v in self.entries:
            if k == key:
                return v
        raise KeyError(key)

    def replace(self, key, node) -> "Mapping":
        return Mapping(tuple((k, node if k == key else v) for k, v in self.entries), self.mark)


@dataclass(frozen=True)
class RefExpr:
    expr: str
    mark: Mark | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Tagged:
    """``!new``, ``!name``, ``!apply`` carry a dotted target; ``!copy`` wraps a RefExpr;
    ``!tuple`` wraps a Sequence."""

    tag: TagKind
    target: str
    args: "ConfigNode"
    mark: Mark | None = field(default=None, compare=False, repr=False)


ConfigNode = Union[Scalar, Sequence, Mapping, RefExpr, Tagged]


def to_plain(node: ConfigNode):
    """Tagless tree to nested dict/list/scalars; raises on tagged nodes."""
    if isinstance(node, Scalar):
        return node.value
    if isinstance(node, Sequence):
        return [to_plain(n) for n in node.items]
    if isinstance(node, Mapping):
        return {k: to_plain(v) for k, v in node.entries}
    raise TypeError(f"{type(node).__name__} has no plain value")

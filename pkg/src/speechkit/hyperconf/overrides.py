"""Command-line style overrides applied to the parse tree before resolution."""

from __future__ import annotations

from typing import Iterable

from .errors import ConfigError, OverrideError
from .nodes import ConfigNode, Mapping, RefExpr, Scalar, Tagged, TagKind

OverrideSet = list  # of (dotted_path, raw_value)

# keyword arguments of these tags are addressable as if they were a mapping
_WITH_KWARGS = (TagKind.NEW, TagKind.NAME, TagKind.APPLY)


def parse_override_args(args: Iterable[str]) -> tuple[OverrideSet, list]:
    """Split ``--key=value`` items from other arguments.

    Returns ``(overrides, rest)``; ``--key value`` is not accepted because
    it is ambiguous with flags.
    """
    overrides, rest = [], []
    for arg in args:
        if arg.startswith("--") and "=" in arg:
            key, _, raw = arg[2:].partition("=")
            if not key:
                raise OverrideError(f"malformed override {arg!r}")
            overrides.append((key, raw))
        else:
            rest.append(arg)
    return overrides, rest


def parse_value(raw: str) -> ConfigNode:
    from .parser import parse_text

    try:
        node = parse_text(raw) if raw.strip() else Scalar(raw)
    except ConfigError as e:
        raise OverrideError(f"cannot parse override value {raw!r}: {e}") from None
    if not isinstance(node, (Scalar, RefExpr)):
        raise OverrideError(f"override value {raw!r} is not a scalar")
    return node


def replace_path(root: Mapping, path: str, value: ConfigNode, scalar_only: bool = True) -> Mapping:
    parts = path.split(".")

    def walk(node: ConfigNode, i: int) -> ConfigNode:
        where = ".".join(parts[:i])
        if isinstance(node, Tagged) and node.tag in _WITH_KWARGS and isinstance(node.args, Mapping):
            return Tagged(node.tag, node.target, walk(node.args, i), node.mark)
        if not isinstance(node, Mapping):
            raise OverrideError(f"override {path!r}: {where} is not a plain mapping")
        key = _match_key(node, parts[i])
        if key is _MISSING:
            raise OverrideError(f"override {path!r}: no key {'.'.join(parts[: i + 1])}")
        child = node[key]
        if i + 1 < len(parts):
            return node.replace(key, walk(child, i + 1))
        if scalar_only and not isinstance(child, (Scalar, RefExpr)):
            raise OverrideError(f"override {path!r} targets a non-scalar node")
        return node.replace(key, value)

    return walk(root, 0)


_MISSING = object()


def _match_key(node: Mapping, text: str):
    if text in node:
        return text
    # keys parsed as numbers or booleans are matched by their YAML spelling
    parsed = parse_value(text)
    if isinstance(parsed, Scalar) and parsed.value in node:
        return parsed.value
    return _MISSING


def apply_overrides(root: Mapping, overrides: OverrideSet) -> Mapping:
    """Replace addressed scalars; ``!ref`` nodes are resolved later against the new tree."""
    for path, raw in overrides:
        root = replace_path(root, path, parse_value(raw))
    return root

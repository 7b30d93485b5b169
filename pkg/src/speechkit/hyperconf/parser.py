"""YAML subset reader producing ConfigNode trees.

PyYAML does the tokenizing and composing; this module walks the composed
node graph, checks tags, rejects anchors and duplicate keys, and splices
``!include`` files in place.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import yaml
from yaml.events import AliasEvent, CollectionStartEvent, ScalarEvent

from .errors import (
    ConfigSyntaxError,
    IncludeCycleError,
    IncludeDepthError,
    IncludeNotFoundError,
    UnknownTagError,
)
from .nodes import ConfigNode, Mapping, Mark, RefExpr, Scalar, Sequence, Tagged, TagKind

MAX_INCLUDE_DEPTH = 32
_STD_PREFIX = "tag:yaml.org,2002:"
_WITH_TARGET = {TagKind.NEW, TagKind.NAME, TagKind.APPLY, TagKind.INCLUDE}

# YAML 1.1 wants a dot in floats; "1e-3" is a common way to write learning rates.
_EXP_FLOAT = re.compile(r"^[-+]?[0-9][0-9_]*(?:\.[0-9_]*)?[eE][-+]?[0-9]+$")


class _Loader(yaml.SafeLoader):
    def compose_node(self, parent, index):
        if self.check_event(AliasEvent):
            ev = self.peek_event()
            raise _fail("aliases are not supported, use !ref or !copy", ev.start_mark)
        ev = self.peek_event()
        if isinstance(ev, (ScalarEvent, CollectionStartEvent)) and ev.anchor is not None:
            raise _fail("anchors are not supported, use !ref or !copy", ev.start_mark)
        return super().compose_node(parent, index)


class _Dumper(yaml.SafeDumper):
    pass


for _cls in (_Loader, _Dumper):
    _cls.add_implicit_resolver(_STD_PREFIX + "float", _EXP_FLOAT, list("-+0123456789"))


def _fail(msg: str, mark, source: str | None = None, cls=ConfigSyntaxError) -> ConfigSyntaxError:
    if mark is None:
        return cls(msg, source=source)
    return cls(msg, mark.line + 1, mark.column + 1, source or mark.name)


def _mark(node) -> Mark:
    return Mark(node.start_mark.line + 1, node.start_mark.column + 1)


def _split_tag(tag: str) -> tuple[TagKind, str]:
    name, _, target = tag[1:].partition(":")
    return TagKind(name), target


class _Builder:
    def __init__(self, source: Path | None, stack: tuple, base_dir: Path | None = None, depth: int = 0):
        self.source = source
        self.stack = stack
        self.depth = depth
        if base_dir is None:
            base_dir = source.parent if source is not None else Path.cwd()
        self.base_dir = base_dir
        self.loader = _Loader("")

    def err(self, msg, node, cls=ConfigSyntaxError):
        return _fail(msg, node.start_mark, str(self.source) if self.source else None, cls)

    def build(self, node) -> ConfigNode:
        tag = node.tag
        if tag.startswith(_STD_PREFIX):
            return self.plain(node)
        if not tag.startswith("!") or tag.startswith("!!"):
            raise self.err(f"unknown tag {tag!r}", node, UnknownTagError)
        try:
            kind, target = _split_tag(tag)
        except ValueError:
            raise self.err(f"unknown tag {tag!r}", node, UnknownTagError) from None
        if kind in _WITH_TARGET and not target:
            raise self.err(f"!{kind.value} needs a target, as in !{kind.value}:path", node)
        if kind not in _WITH_TARGET and target:
            raise self.err(f"!{kind.value} takes no target", node)

        if kind is TagKind.REF or kind is TagKind.COPY:
            if not isinstance(node, yaml.ScalarNode):
                raise self.err(f"!{kind.value} expects a scalar expression", node)
            ref = RefExpr(node.value, _mark(node))
            return ref if kind is TagKind.REF else Tagged(kind, "", ref, _mark(node))
        if kind is TagKind.TUPLE:
            return Tagged(kind, "", self.tuple_items(node), _mark(node))
        if kind is TagKind.INCLUDE:
            return self.include(target, node)
        args = self.build_untagged(node)
        return Tagged(kind, target, args, _mark(node))

    def build_untagged(self, node) -> ConfigNode:
        if isinstance(node, yaml.ScalarNode):
            if node.value == "" and node.style is None:
                return Scalar(None, _mark(node))
            plain = node.style is None
            tag = self.loader.resolve(yaml.ScalarNode, node.value, (plain, not plain))
            return self.plain(yaml.ScalarNode(tag, node.value, node.start_mark, node.end_mark, node.style))
        if isinstance(node, yaml.SequenceNode):
            return Sequence(tuple(self.build(n) for n in node.value), _mark(node))
        return self.mapping(node)

    def tuple_items(self, node) -> Sequence:
        if isinstance(node, yaml.SequenceNode):
            return Sequence(tuple(self.build(n) for n in node.value), _mark(node))
        if isinstance(node, yaml.ScalarNode):
            text = node.value.strip()
            if text.startswith("(") and text.endswith(")"):
                text = text[1:-1]
            inner = parse_text("[" + text + "]", None)
            return Sequence(inner.items, _mark(node))
        raise self.err("!tuple expects a sequence or '(a, b)' scalar", node)

    def plain(self, node) -> ConfigNode:
        if isinstance(node, yaml.ScalarNode):
            try:
                value = self.loader.construct_object(node, deep=True)
            except yaml.constructor.ConstructorError as e:
                raise self.err(e.problem or str(e), node) from None
            if not isinstance(value, (str, int, float, bool, type(None))):
                raise self.err(f"unsupported scalar type {type(value).__name__}", node)
            return Scalar(value, _mark(node))
        if isinstance(node, yaml.SequenceNode):
            if node.tag != _STD_PREFIX + "seq":
                raise self.err(f"unsupported tag {node.tag!r}", node, UnknownTagError)
            return Sequence(tuple(self.build(n) for n in node.value), _mark(node))
        if node.tag != _STD_PREFIX + "map":
            raise self.err(f"unsupported tag {node.tag!r}", node, UnknownTagError)
        return self.mapping(node)

    def mapping(self, node) -> Mapping:
        entries, seen = [], set()
        for knode, vnode in node.value:
            if knode.tag == _STD_PREFIX + "merge":
                raise self.err("merge keys are not supported", knode)
            key = self.build(knode)
            if not isinstance(key, Scalar):
                raise self.err("mapping keys must be scalars", knode)
            if key.value in seen:
                raise self.err(f"duplicate key {key.value!r}", knode)
            seen.add(key.value)
            entries.append((key.value, self.build(vnode)))
        return Mapping(tuple(entries), _mark(node))

    def include(self, target: str, node) -> ConfigNode:
        path = Path(target)
        if not path.is_absolute():
            path = self.base_dir / path
        real = Path(os.path.realpath(path))
        if real in self.stack:
            chain = " -> ".join(str(p) for p in (*self.stack, real))
            raise self.err(f"include cycle: {chain}", node, IncludeCycleError)
        if self.depth >= MAX_INCLUDE_DEPTH:
            raise self.err(f"include depth exceeds {MAX_INCLUDE_DEPTH}", node, IncludeDepthError)
        if not real.is_file():
            raise self.err(f"include file not found: {path}", node, IncludeNotFoundError)
        try:
            text = real.read_text(encoding="utf-8")
        except OSError as e:
            raise self.err(f"cannot read include {path}: {e.strerror}", node, IncludeNotFoundError) from None
        included = _parse(text, real, (*self.stack, real), depth=self.depth + 1)
        args = self.build_untagged(node)
        if isinstance(args, Mapping):
            from .overrides import replace_path

            for key, value in args.entries:
                included = replace_path(included, str(key), value, scalar_only=False)
        elif not (isinstance(args, Scalar) and args.value is None):
            raise self.err("!include arguments must be a mapping of overrides", node)
        return included


def _parse(text: str, source: Path | None, stack: tuple, base_dir: Path | None = None, depth: int = 0) -> ConfigNode:
    loader = _Loader(text)
    loader.name = str(source) if source is not None else "<string>"
    try:
        root = loader.get_single_node()
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        raise _fail(e.problem or str(e), mark, str(source) if source else None) from None
    except yaml.YAMLError as e:
        raise ConfigSyntaxError(str(e), source=str(source) if source else None) from None
    finally:
        loader.dispose()
    if root is None:
        return Mapping(())
    return _Builder(source, stack, base_dir, depth).build(root)


def parse_text(text: str, source: str | os.PathLike | None = None) -> ConfigNode:
    """Any node, not necessarily a mapping. ``source`` anchors includes."""
    if source is None:
        return _parse(text, None, ())
    source = Path(source)
    return _parse(text, source, (Path(os.path.realpath(source)),))


def _as_root(node: ConfigNode, source) -> Mapping:
    if not isinstance(node, Mapping):
        raise ConfigSyntaxError("document root must be a mapping", source=str(source) if source else None)
    return node


def parse_config(text: str, base_dir: str | os.PathLike = ".") -> Mapping:
    """Parse a document whose root must be a mapping; includes resolve against ``base_dir``."""
    return _as_root(_parse(text, None, (), Path(base_dir)), None)


def load_config(path: str | os.PathLike) -> Mapping:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IncludeNotFoundError(f"cannot read {path}: {e.strerror}") from None
    return _as_root(parse_text(text, path), path)

"""YAML output for parse trees and resolved values."""

from __future__ import annotations

import yaml

from .nodes import ConfigNode, Mapping, RefExpr, Scalar, Sequence, TagKind
from .parser import _Dumper, _Loader
from .resolver import Constructed, Curried, Deferred

_STD = "tag:yaml.org,2002:"
# PyYAML folds these inside plain or single-quoted scalars; double quotes escape them
_BREAKS = "\x85\u2028\u2029"


# Sentinel style: emit plain if the value reads back as the same type.
# PyYAML would otherwise quote every scalar that carries an application tag.
_PLAIN_OK = "plain-ok"
_resolver = _Loader("")


class _TreeDumper(_Dumper):
    def choose_scalar_style(self):
        ev = self.event
        if ev.style == _PLAIN_OK:
            ev.style = None
            if self.analysis is None:
                self.analysis = self.analyze_scalar(ev.value)
            a = self.analysis
            if self.simple_key_context and (a.empty or a.multiline):
                return super().choose_scalar_style()
            if a.empty or (a.allow_flow_plain if self.flow_level else a.allow_block_plain):
                return ""
        return super().choose_scalar_style()


def _retag(node, tag: str):
    if isinstance(node, yaml.ScalarNode) and node.style is None:
        if _resolver.resolve(yaml.ScalarNode, node.value, (True, False)) == node.tag:
            node.style = _PLAIN_OK
    node.tag = tag
    return node


def _scalar(value, rep):
    node = rep.represent_data(value)
    if isinstance(value, str) and any(c in value for c in _BREAKS):
        node.style = '"'
    return node


def _node(n: ConfigNode, rep: yaml.representer.SafeRepresenter):
    if isinstance(n, Scalar):
        return _scalar(n.value, rep)
    if isinstance(n, Sequence):
        return yaml.SequenceNode(_STD + "seq", [_node(c, rep) for c in n.items])
    if isinstance(n, Mapping):
        return yaml.MappingNode(_STD + "map", [(_scalar(k, rep), _node(v, rep)) for k, v in n.entries])
    if isinstance(n, RefExpr):
        return _retag(rep.represent_data(n.expr), "!ref")
    tag = f"!{n.tag.value}" + (f":{n.target}" if n.target else "")
    if n.tag is TagKind.COPY:
        return _retag(rep.represent_data(n.args.expr), tag)
    if isinstance(n.args, Scalar) and n.args.value is None:
        return yaml.ScalarNode(tag, "", style=_PLAIN_OK)
    return _retag(_node(n.args, rep), tag)


def serialize(root: ConfigNode) -> str:
    """Inverse of :func:`parse_text` up to formatting."""
    rep = yaml.representer.SafeRepresenter()
    return yaml.serialize(_node(root, rep), Dumper=_TreeDumper, allow_unicode=True)


class _ResolvedDumper(_Dumper):
    pass


def _args_node(dumper, tag: str, positional: list, keyword: dict):
    if positional and keyword:
        return dumper.represent_mapping(tag, {"args": list(positional), "kwargs": dict(keyword)})
    if positional:
        return dumper.represent_sequence(tag, list(positional))
    return dumper.represent_mapping(tag, dict(keyword))


def _represent_deferred(dumper, d: Deferred):
    return _args_node(dumper, f"!deferred:{d.target}", d.positional, d.keyword)


def _represent_constructed(dumper, c: Constructed):
    return _args_node(dumper, f"!{'name' if isinstance(c.product, Curried) else 'new'}:{c.factory_id}",
                      c.positional, c.keyword)


def _represent_tuple(dumper, t: tuple):
    return dumper.represent_sequence("!tuple", list(t), flow_style=True)


def _represent_other(dumper, obj):
    # numpy scalars and other subclasses of plain types from !apply products
    item = getattr(obj, "item", None)
    if callable(item):
        try:
            value = item()
        except (TypeError, ValueError):
            value = obj
        if type(value) in (bool, int, float, str):
            return dumper.represent_data(value)
    for base in (bool, int, float, str):
        if isinstance(obj, base):
            return dumper.represent_data(base(obj))
    return dumper.represent_scalar("!opaque", repr(obj))


_ResolvedDumper.add_representer(Deferred, _represent_deferred)
_ResolvedDumper.add_representer(Constructed, _represent_constructed)
_ResolvedDumper.add_representer(tuple, _represent_tuple)
_ResolvedDumper.add_multi_representer(object, _represent_other)


def dump_resolved(values: dict) -> str:
    """Canonical YAML for resolved values, key order kept."""
    return yaml.dump(values, Dumper=_ResolvedDumper, sort_keys=False, allow_unicode=True, default_flow_style=False)

"""Configuration language: YAML with object tags, references and overrides."""

from .dump import dump_resolved, serialize
from .errors import (
    ConfigError,
    ConfigSyntaxError,
    DuplicateFactoryError,
    FactoryError,
    IncludeCycleError,
    IncludeDepthError,
    IncludeError,
    IncludeNotFoundError,
    OverrideError,
    RefExprError,
    ReferenceCycleError,
    UnknownTagError,
)
from .nodes import ConfigNode, Mapping, RefExpr, Scalar, Sequence, Tagged, TagKind, to_plain
from .overrides import OverrideSet, apply_overrides, parse_override_args
from .parser import MAX_INCLUDE_DEPTH, load_config, parse_config, parse_text
from .refexpr import eval_ref_expr
from .registry import FactoryRegistry
from .resolver import Constructed, Curried, Deferred, resolve, resolution_order

__all__ = [
    "ConfigError",
    "ConfigNode",
    "ConfigSyntaxError",
    "Constructed",
    "Curried",
    "Deferred",
    "DuplicateFactoryError",
    "FactoryError",
    "FactoryRegistry",
    "IncludeCycleError",
    "IncludeDepthError",
    "IncludeError",
    "IncludeNotFoundError",
    "MAX_INCLUDE_DEPTH",
    "Mapping",
    "OverrideError",
    "OverrideSet",
    "RefExpr",
    "RefExprError",
    "ReferenceCycleError",
    "Scalar",
    "Sequence",
    "TagKind",
    "Tagged",
    "UnknownTagError",
    "apply_overrides",
    "dump_resolved",
    "eval_ref_expr",
    "load_config",
    "parse_config",
    "parse_override_args",
    "parse_text",
    "resolution_order",
    "resolve",
    "serialize",
    "to_plain",
]

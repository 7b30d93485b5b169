"""Evaluator for ``!ref`` expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | atom
    atom   := NUMBER | STRING | '<' path '>' | '(' expr ')'

Integer division with an exact quotient stays an integer. ``+`` on two
strings concatenates and ``/`` with a string operand joins with a slash,
so ``<folder>/<seed>`` reads as a path. Text outside the grammar, such as
``<folder>/train.json``, falls back to placeholder interpolation.
"""

from __future__ import annotations

import re
from typing import Any, Callable

from .errors import RefExprError

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<ref><[^<>\s]+>)
      | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
      | (?P<str>'[^']*'|"[^"]*")
      | (?P<op>[-+*/()])
    )""",
    re.VERBOSE,
)
_PLACEHOLDER = re.compile(r"<([^<>\s]+)>")
_PATH_PART = re.compile(r"([^.\[\]]+)|\[(-?\d+)\]")


class _NotInGrammar(Exception):
    pass


def placeholders(expr: str) -> list[str]:
    return _PLACEHOLDER.findall(expr)


def split_path(path: str) -> list:
    """``a.b[0].c`` -> ``['a', 'b', 0, 'c']``."""
    parts, pos = [], 0
    for m in _PATH_PART.finditer(path):
        if m.start() != pos and path[pos:m.start()] != ".":
            raise RefExprError(f"malformed reference path <{path}>")
        parts.append(m.group(1) if m.group(1) is not None else int(m.group(2)))
        pos = m.end()
    if pos != len(path) or not parts:
        raise RefExprError(f"malformed reference path <{path}>")
    return parts


def _tokenize(expr: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    expr = expr.rstrip()
    while pos < len(expr):
        m = _TOKEN.match(expr, pos)
        if m is None or m.end() == pos:
            raise _NotInGrammar
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(text: str):
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


def _binary(op: str, a, b):
    if op == "/" and (isinstance(a, str) or isinstance(b, str)):
        if not all(isinstance(v, str) or _is_num(v) for v in (a, b)):
            raise RefExprError(f"cannot join {type(a).__name__} and {type(b).__name__} with '/'")
        return f"{a}/{b}"
    if op == "+" and isinstance(a, str) and isinstance(b, str):
        return a + b
    if not (_is_num(a) and _is_num(b)):
        raise RefExprError(f"unsupported operands for {op!r}: {type(a).__name__} and {type(b).__name__}")
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise RefExprError("division by zero")
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return a / b


class _Parser:
    def __init__(self, tokens, lookup: Callable[[str], Any]):
        self.tokens, self.pos, self.lookup = tokens, 0, lookup

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        value = self.expr()
        if self.pos != len(self.tokens):
            raise _NotInGrammar
        return value

    def expr(self):
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            value = _binary(self.take()[1], value, self.term())
        return value

    def term(self):
        value = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            value = _binary(self.take()[1], value, self.unary())
        return value

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            value = self.unary()
            if not _is_num(value):
                raise RefExprError(f"cannot negate {type(value).__name__}")
            return -value
        return self.atom()

    def atom(self):
        kind, text = self.take()
        if kind == "num":
            return _number(text)
        if kind == "str":
            return text[1:-1]
        if kind == "ref":
            value = self.lookup(text[1:-1])
            if not isinstance(value, (str, int, float, bool, type(None))):
                raise RefExprError(f"<{text[1:-1]}> is not a scalar and cannot be used in an expression")
            return value
        if (kind, text) == ("op", "("):
            value = self.expr()
            if self.take() != ("op", ")"):
                raise _NotInGrammar
            return value
        raise _NotInGrammar


def eval_ref_expr(expr: str, env) -> Any:
    """Evaluate ``expr`` against ``env``, a mapping of resolved top-level values."""

    def lookup(path: str):
        return lookup_path(env, path)

    stripped = expr.strip()
    m = _PLACEHOLDER.fullmatch(stripped)
    if m:
        return lookup(m.group(1))
    try:
        tokens = _tokenize(stripped)
        if not tokens:
            raise _NotInGrammar
        return _Parser(tokens, lookup).parse()
    except _NotInGrammar:
        pass

    def interpolate(m):
        value = lookup(m.group(1))
        if not isinstance(value, (str, int, float, bool, type(None))):
            raise RefExprError(f"<{m.group(1)}> is not a scalar and cannot be interpolated")
        return str(value)

    return _PLACEHOLDER.sub(interpolate, expr)


def lookup_path(env, path: str):
    from .resolver import Constructed, Deferred

    parts = split_path(path)
    if parts[0] not in env:
        raise RefExprError(f"undefined reference <{path}>")
    value = env[parts[0]]
    for i, part in enumerate(parts[1:], 1):
        if isinstance(value, (Constructed, Deferred)):
            raise RefExprError(f"<{path}>: references into constructed objects are not supported")
        try:
            value = value[part]
        except (KeyError, IndexError, TypeError):
            shown = ".".join(map(str, parts[: i + 1]))
            raise RefExprError(f"undefined reference <{path}> (no {shown})") from None
    return value

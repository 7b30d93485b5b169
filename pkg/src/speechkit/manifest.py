"""Data manifests: per-example static items loaded from JSON or CSV."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

_INT = re.compile(r"[-+]?\d+")
_FLOAT = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")
_PATHLIKE = re.compile(r"^[^\s]+\.[A-Za-z0-9]{1,5}$")
PLACEHOLDER = "{data_root}"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Manifest:
    """Ordered ``example_id -> {item: scalar}``. Treat as read-only."""

    examples: dict
    data_root: str = ""

    def __getitem__(self, example_id: str) -> dict:
        return self.examples[example_id]

    def __contains__(self, example_id) -> bool:
        return example_id in self.examples

    def __iter__(self) -> Iterator[str]:
        return iter(self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def ids(self) -> list[str]:
        return list(self.examples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Manifest):
            return NotImplemented
        return (self.data_root == other.data_root
                and list(self.examples.items()) == list(other.examples.items())
                and all(list(a.items()) == list(other.examples[k].items()) for k, a in self.examples.items()))


def _substitute(value, root: str):
    if isinstance(value, str) and PLACEHOLDER in value:
        return value.replace(PLACEHOLDER, root)
    return value


def _root_text(data_root) -> str:
    root = os.fspath(data_root) if data_root is not None else ""
    return root.rstrip("/") or root[:1]


# ---- JSON ----

def _strip_trailing_commas(text: str) -> str:
    """Drop commas that directly precede ``}`` or ``]``, outside strings."""
    out, i, n = [], 0, len(text)
    in_str = False
    while i < n:
        c = text[i]
        if in_str:
            out.append(c)
            if c == "\\" and i + 1 < n:
                out.append(text[i + 1])
                i += 1
            elif c == '"':
                in_str = False
        elif c == '"':
            in_str = True
            out.append(c)
        elif c == ",":
            j = i + 1
            while j < n and text[j] in " \t\r\n":
                j += 1
            if j >= n or text[j] not in "}]":
                out.append(c)
        else:
            out.append(c)
        i += 1
    return "".join(out)


def _no_dup_pairs(pairs):
    d = {}
    for k, v in pairs:
        if k in d:
            raise ManifestError(f"duplicate key {k!r}")
        d[k] = v
    return d


def _parse_json(text: str, root: str, where: str) -> dict:
    try:
        data = json.loads(_strip_trailing_commas(text), object_pairs_hook=_no_dup_pairs)
    except json.JSONDecodeError as e:
        raise ManifestError(f"{where}:{e.lineno}:{e.colno}: {e.msg}") from None
    except ManifestError as e:
        raise ManifestError(f"{where}: {e}") from None
    if not isinstance(data, dict):
        raise ManifestError(f"{where}: top level must be an object of examples")
    examples = {}
    for ex_id, items in data.items():
        if not isinstance(items, dict):
            raise ManifestError(f"{where}: example {ex_id!r} must be an object")
        row = {}
        for key, value in items.items():
            if not isinstance(value, (str, int, float, bool)):
                raise ManifestError(f"{where}: {ex_id}.{key} is not a scalar ({type(value).__name__})")
            row[key] = _substitute(value, root)
        examples[ex_id] = row
    return examples


# ---- CSV ----

def _csv_records(text: str, where: str):
    """RFC 4180 records as lists of ``(text, was_quoted)``, with their line numbers."""
    i, n, line = 0, len(text), 1
    while i < n:
        start_line = line
        fields, buf, quoted = [], [], False
        at_field_start = True
        while True:
            if i >= n:
                fields.append(("".join(buf), quoted))
                break
            c = text[i]
            if at_field_start and c == '"':
                quoted, at_field_start = True, False
                i += 1
                while True:
                    if i >= n:
                        raise ManifestError(f"{where}:{start_line}: unterminated quoted field")
                    c = text[i]
                    if c == '"':
                        if i + 1 < n and text[i + 1] == '"':
                            buf.append('"')
                            i += 2
                            continue
                        i += 1
                        break
                    if c == "\n":
                        line += 1
                    buf.append(c)
                    i += 1
                if i < n and text[i] not in ",\r\n":
                    raise ManifestError(f"{where}:{line}: text after closing quote")
                continue
            if c == ",":
                fields.append(("".join(buf), quoted))
                buf, quoted, at_field_start = [], False, True
                i += 1
                continue
            if c in "\r\n":
                fields.append(("".join(buf), quoted))
                i += 2 if text.startswith("\r\n", i) else 1
                line += 1
                break
            if c == '"' and not quoted:
                raise ManifestError(f"{where}:{line}: quote inside unquoted field")
            buf.append(c)
            at_field_start = False
            i += 1
        if fields != [("", False)]:
            yield start_line, fields


def _typed(text: str, quoted: bool):
    if quoted:
        return text
    if _INT.fullmatch(text):
        return int(text)
    if _FLOAT.fullmatch(text):
        return float(text)
    return text


def _parse_csv(text: str, root: str, where: str) -> dict:
    if text.startswith("﻿"):
        text = text[1:]
    records = _csv_records(text, where)
    try:
        _, header = next(records)
    except StopIteration:
        return {}
    names = [t for t, _ in header]
    if names[0] != "ID":
        raise ManifestError(f"{where}:1: header must start with ID, got {names[0]!r}")
    if len(set(names)) != len(names):
        raise ManifestError(f"{where}:1: duplicate column names")
    examples = {}
    for line, fields in records:
        if len(fields) != len(names):
            raise ManifestError(f"{where}:{line}: expected {len(names)} fields, got {len(fields)}")
        ex_id = fields[0][0]
        if ex_id in examples:
            raise ManifestError(f"{where}:{line}: duplicate id {ex_id!r}")
        examples[ex_id] = {k: _substitute(_typed(t, q), root) for k, (t, q) in zip(names[1:], fields[1:])}
    return examples


def load_manifest(path, format: str = "auto", data_root="") -> Manifest:
    path = Path(path)
    if format == "auto":
        suffix = path.suffix.lower()
        if suffix not in (".json", ".csv"):
            raise ManifestError(f"{path}: cannot infer format from extension {suffix!r}")
        format = suffix[1:]
    if format not in ("json", "csv"):
        raise ManifestError(f"unknown manifest format {format!r}")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ManifestError(f"cannot read {path}: {e}") from None
    return parse_manifest(text, format, data_root, where=str(path))


def parse_manifest(text: str, format: str, data_root="", where: str = "<string>") -> Manifest:
    root = _root_text(data_root)
    parse = _parse_json if format == "json" else _parse_csv
    return Manifest(parse(text, root, where), root)


@dataclass(frozen=True)
class Finding:
    kind: str  # missing_file | nonpositive_length | bad_length | empty
    example_id: str | None = None
    key: str | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __iter__(self):
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def render(self) -> str:
        lines = []
        for f in self.findings:
            parts = [f.kind, f.example_id, f.key, f.detail or None]
            lines.append("\t".join(p for p in parts if p is not None))
        return "\n".join(lines) + ("\n" if lines else "")


def _looks_like_path(value) -> bool:
    return isinstance(value, str) and ("/" in value or bool(_PATHLIKE.match(value))) and " " not in value


def validate_manifest(m: Manifest, audio_check: bool = True, path_keys=None) -> ValidationReport:
    """Report problems without raising. ``path_keys`` limits the file check to those items."""
    report = ValidationReport()
    if not len(m):
        report.findings.append(Finding("empty", detail="manifest has no examples"))
    for ex_id, items in m.examples.items():
        for key, value in items.items():
            if audio_check and (key in path_keys if path_keys is not None else _looks_like_path(value)):
                if not os.path.isfile(value):
                    report.findings.append(Finding("missing_file", ex_id, key, value))
        if "length" in items:
            length = items["length"]
            if isinstance(length, bool) or not isinstance(length, (int, float)):
                report.findings.append(Finding("bad_length", ex_id, "length", repr(length)))
            elif not length > 0:
                report.findings.append(Finding("nonpositive_length", ex_id, "length", repr(length)))
    return report

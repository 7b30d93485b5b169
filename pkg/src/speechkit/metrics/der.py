"""Diarization error rate with a forgiveness collar and optimal speaker mapping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

Segment = tuple  # (start_s, end_s, speaker)


@dataclass(frozen=True)
class DerBreakdown:
    false_alarm: float
    missed: float
    confusion: float
    reference_length: float
    mapping: dict

    @property
    def der(self) -> float:
        return 100.0 * (self.false_alarm + self.missed + self.confusion) / self.reference_length


def _check(segments: Iterable[Segment], name: str) -> list[Segment]:
    out = []
    for seg in segments:
        start, end, spk = seg
        start, end = float(start), float(end)
        if not end > start:
            raise ValueError(f"{name} segment {seg!r}: end must exceed start")
        out.append((start, end, str(spk)))
    return out


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def der_breakdown(
    ref: Sequence[Segment],
    hyp: Sequence[Segment],
    collar: float = 0.0,
    ignore_overlap: bool = False,
) -> DerBreakdown:
    """Score ``hyp`` against ``ref``; all durations are in seconds.

    Overlapped speech is scored per speaker: a region with ``n_ref`` reference
    and ``n_hyp`` hypothesis speakers contributes ``max(0, n_ref - n_hyp)`` to
    missed speech, ``max(0, n_hyp - n_ref)`` to false alarm and
    ``min(n_ref, n_hyp)`` minus the correctly mapped speakers to confusion.
    """
    ref = _check(ref, "reference")
    hyp = _check(hyp, "hypothesis")
    if not ref:
        raise ValueError("empty reference")
    if collar < 0:
        raise ValueError("collar must be non-negative")

    excluded = []
    if collar > 0:
        for s, e, _ in ref:
            excluded.append((s - collar, s + collar))
            excluded.append((e - collar, e + collar))
    excluded = _merge(excluded)

    points = {p for s, e, _ in ref + hyp for p in (s, e)}
    points.update(p for iv in excluded for p in iv)
    edges = np.array(sorted(points))
    mids = 0.5 * (edges[:-1] + edges[1:])
    durs = np.diff(edges)

    ref_spk = sorted({spk for _, _, spk in ref})
    hyp_spk = sorted({spk for _, _, spk in hyp})
    ref_act = np.zeros((len(ref_spk), len(mids)), dtype=bool)
    hyp_act = np.zeros((len(hyp_spk), len(mids)), dtype=bool)
    ref_idx = {s: i for i, s in enumerate(ref_spk)}
    hyp_idx = {s: i for i, s in enumerate(hyp_spk)}
    for s, e, spk in ref:
        ref_act[ref_idx[spk]] |= (mids > s) & (mids < e)
    for s, e, spk in hyp:
        hyp_act[hyp_idx[spk]] |= (mids > s) & (mids < e)

    scored = np.ones(len(mids), dtype=bool)
    for a, b in excluded:
        scored &= ~((mids > a) & (mids < b))
    n_ref = ref_act.sum(axis=0)
    n_hyp = hyp_act.sum(axis=0)
    if ignore_overlap:
        scored &= n_ref < 2

    w = np.where(scored, durs, 0.0)
    ref_len = float(np.sum(w * n_ref))
    if ref_len <= 0:
        raise ValueError("no reference speech left to score after exclusions")
    missed = float(np.sum(w * np.maximum(n_ref - n_hyp, 0)))
    false_alarm = float(np.sum(w * np.maximum(n_hyp - n_ref, 0)))

    mapping: dict = {}
    correct = 0.0
    if hyp_spk:
        overlap = (ref_act * w) @ hyp_act.T.astype(float)
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        for r, c in zip(rows, cols):
            if overlap[r, c] > 0:
                mapping[hyp_spk[c]] = ref_spk[r]
            correct += overlap[r, c]
    confusion = float(np.sum(w * np.minimum(n_ref, n_hyp))) - correct
    return DerBreakdown(false_alarm, missed, max(confusion, 0.0), ref_len, mapping)


def der(
    ref: Sequence[Segment],
    hyp: Sequence[Segment],
    collar: float = 0.0,
    ignore_overlap: bool = False,
) -> float:
    """DER in percent."""
    return der_breakdown(ref, hyp, collar, ignore_overlap).der


def read_rttm(path) -> list[Segment]:
    """Read the SPEAKER lines of an RTTM file as ``(start, end, speaker)``."""
    segments = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields or fields[0] != "SPEAKER":
                continue
            if len(fields) < 8:
                raise ValueError(f"{path}:{lineno}: malformed SPEAKER line")
            start, dur = float(fields[3]), float(fields[4])
            segments.append((start, start + dur, fields[7]))
    return segments

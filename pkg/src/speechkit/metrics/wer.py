"""Token error rate (WER / PER) with Levenshtein alignments and the summary report."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .._kernels import DEL, EQ, INS, SUB, align_codes

EPS = "<eps>"
OP_NAMES = {EQ: "EQ", SUB: "SUB", DEL: "DEL", INS: "INS"}
OP_SYMBOLS = {EQ: "=", SUB: "S", DEL: "D", INS: "I"}
SEPARATOR = "=" * 41


@dataclass(frozen=True)
class Alignment:
    """Sequence of ``(op, ref_token, hyp_token)``; the missing side is ``None``."""

    ops: tuple

    @property
    def codes(self) -> list[str]:
        return [OP_NAMES[op] for op, _, _ in self.ops]

    def count(self, op: int) -> int:
        return sum(1 for o, _, _ in self.ops if o == op)

    @property
    def errors(self) -> int:
        return sum(1 for o, _, _ in self.ops if o != EQ)

    def ref_tokens(self) -> list:
        return [r for _, r, _ in self.ops if r is not None]

    def hyp_tokens(self) -> list:
        return [h for _, _, h in self.ops if h is not None]


def _encode(ref: Sequence, hyp: Sequence) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict = {}
    r = np.fromiter((vocab.setdefault(t, len(vocab)) for t in ref), dtype=np.int32, count=len(ref))
    h = np.fromiter((vocab.setdefault(t, len(vocab)) for t in hyp), dtype=np.int32, count=len(hyp))
    return r, h


def align(ref: Sequence, hyp: Sequence) -> Alignment:
    """Minimal unit-cost alignment of two token sequences.

    Ties in the backtrace prefer EQ, then SUB, DEL and INS, so the alignment
    of a given pair is always the same.
    """
    r, h = _encode(ref, hyp)
    ops, ri, hj = align_codes(r, h)
    out = []
    for op, i, j in zip(ops.tolist(), ri.tolist(), hj.tolist()):
        out.append((op, ref[i] if i >= 0 else None, hyp[j] if j >= 0 else None))
    return Alignment(tuple(out))


@dataclass
class UtteranceScore:
    utt_id: str
    alignment: Alignment
    n_ref: int


@dataclass
class ErrorRateStats:
    """Corpus-level accumulator of alignments and error counts."""

    utterances: list[UtteranceScore] = field(default_factory=list)
    n_ref_tokens: int = 0
    subs: int = 0
    dels: int = 0
    ins: int = 0
    missing_hyp: int = 0

    @property
    def scored(self) -> int:
        return len(self.utterances)

    def add(self, utt_id: str, ref: Sequence, hyp: Sequence) -> UtteranceScore:
        return self._add_aligned(utt_id, align(ref, hyp), len(ref))

    def _add_aligned(self, utt_id: str, ali: Alignment, n_ref: int) -> UtteranceScore:
        score = UtteranceScore(utt_id, ali, n_ref)
        self.utterances.append(score)
        self.n_ref_tokens += n_ref
        self.subs += ali.count(SUB)
        self.dels += ali.count(DEL)
        self.ins += ali.count(INS)
        return score

    @property
    def errors(self) -> int:
        return self.subs + self.dels + self.ins


def score_corpus(
    refs: dict[str, Sequence],
    hyps: dict[str, Sequence],
    threads: int = 1,
) -> ErrorRateStats:
    """Align every reference utterance against its hypothesis.

    Utterances missing from ``hyps`` are counted in ``missing_hyp`` and scored
    against an empty hypothesis (all deletions). Report order follows ``refs``.
    """
    ids = list(refs)
    pairs = [(refs[u], hyps.get(u, ())) for u in ids]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            alis = list(pool.map(lambda p: align(*p), pairs))
    else:
        alis = [align(r, h) for r, h in pairs]
    stats = ErrorRateStats()
    for u, (r, _), ali in zip(ids, pairs, alis):
        stats._add_aligned(u, ali, len(r))
    stats.missing_hyp = sum(1 for u in ids if u not in hyps)
    return stats


def error_rate(stats: ErrorRateStats) -> float:
    """100 * (S + D + I) / N over the corpus."""
    if stats.n_ref_tokens <= 0:
        raise ValueError("error rate undefined: the reference corpus has no tokens")
    return 100.0 * stats.errors / stats.n_ref_tokens


def _render_columns(rows: Iterable[tuple[str, str, str]], separator: str = " ; ") -> list[str]:
    top, mid, bot = [], [], []
    for ref_s, op_s, hyp_s in rows:
        width = max(len(ref_s), len(op_s), len(hyp_s))
        top.append(ref_s.center(width))
        mid.append(op_s.center(width))
        bot.append(hyp_s.center(width))
    return [separator.join(top), separator.join(mid), separator.join(bot)]


def _alignment_rows(ali: Alignment) -> list[tuple[str, str, str]]:
    return [
        (EPS if r is None else str(r), OP_SYMBOLS[op], EPS if h is None else str(h))
        for op, r, h in ali.ops
    ]


_LEGEND = [
    (EPS, "I", "and"),
    ("reference", "S", "hypothesis"),
    ("on", "=", "on"),
    ("the", "=", "the"),
    ("first", "S", "third"),
    ("line", "D", EPS),
]


def render_wer_report(stats: ErrorRateStats) -> str:
    """Render the alignment summary file.

    Columns are centred with :meth:`str.center` to the widest of the three
    cells and joined by ``" ; "``.
    """
    lines = [
        f"Scored {stats.scored} sentences, {stats.missing_hyp} not present in hyp.",
        SEPARATOR,
        "ALIGNMENTS",
        "",
        "Format:",
        "<utterance-id>, WER DETAILS",
        *_render_columns(_LEGEND),
    ]
    for utt in stats.utterances:
        lines.append(SEPARATOR)
        lines.append(f"{utt.utt_id}, ")
        lines.extend(_render_columns(_alignment_rows(utt.alignment)))
    return "\n".join(lines) + "\n"


def read_transcripts(path) -> dict[str, list[str]]:
    """Read ``id<TAB>tokens`` lines; blank lines are skipped."""
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if "\t" in line:
                utt, text = line.split("\t", 1)
            else:
                parts = line.split(None, 1)
                utt, text = parts[0], parts[1] if len(parts) > 1 else ""
            if utt in out:
                raise ValueError(f"{path}:{lineno}: duplicate utterance id {utt!r}")
            out[utt] = text.split()
    return out

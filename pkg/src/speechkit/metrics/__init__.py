"""Speech evaluation metrics."""

from .der import DerBreakdown, der, der_breakdown, read_rttm
from .eer import eer, read_scores
from .sisnr import si_snr, si_snri
from .wer import (
    Alignment,
    ErrorRateStats,
    align,
    error_rate,
    read_transcripts,
    render_wer_report,
    score_corpus,
)

__all__ = [
    "Alignment",
    "DerBreakdown",
    "ErrorRateStats",
    "align",
    "der",
    "der_breakdown",
    "eer",
    "error_rate",
    "read_rttm",
    "read_scores",
    "read_transcripts",
    "render_wer_report",
    "score_corpus",
    "si_snr",
    "si_snri",
]

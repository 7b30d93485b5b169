"""Spatial covariance matrices, optionally weighted by time-frequency masks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stft import Spectrogram


@dataclass(frozen=True)
class SpatialCovariance:
    R: np.ndarray  # [K, M, M]
    kind: str = "XX"
    freqs: np.ndarray | None = None
    degenerate_bins: tuple = field(default=())

    @property
    def n_bins(self) -> int:
        return self.R.shape[0]

    @property
    def n_mics(self) -> int:
        return self.R.shape[1]


def compute_scm(spec: Spectrogram, mask=None, kind: str = "XX", eps: float = 1e-10) -> SpatialCovariance:
    """R[k] = sum_t m(t,k) X(:,t,k) X(:,t,k)^H / sum_t m(t,k).

    ``mask`` has shape [T, K] with values in [0, 1]. Bins whose mask sums to
    zero get ``eps * I`` and are listed in ``degenerate_bins``.
    """
    X = spec.X  # [M, T, K]
    m_ch, t, k = X.shape
    if mask is None:
        w = np.ones((t, k))
    else:
        w = np.asarray(mask, dtype=np.float64)
        if w.shape != (t, k):
            raise ValueError(f"mask shape {w.shape} does not match frames x bins {(t, k)}")
    R = np.einsum("tk,ptk,qtk->kpq", w, X, X.conj(), optimize=True)
    total = w.sum(axis=0)
    bad = np.flatnonzero(total <= 0)
    good = total > 0
    R[good] /= total[good, None, None]
    R[bad] = eps * np.eye(m_ch)
    R = 0.5 * (R + R.conj().transpose(0, 2, 1))
    return SpatialCovariance(R, kind, spec.freqs, tuple(int(b) for b in bad))


def is_hermitian(R: np.ndarray, rtol: float = 1e-10) -> bool:
    scale = max(np.max(np.abs(R)), np.finfo(float).tiny)
    return bool(np.max(np.abs(R - R.conj().swapaxes(-1, -2))) <= rtol * scale)

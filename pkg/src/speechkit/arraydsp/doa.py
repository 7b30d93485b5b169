"""Direction-of-arrival estimation: GCC-PHAT, SRP-PHAT and MUSIC."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .covariance import SpatialCovariance, is_hermitian
from .geometry import ArrayGeometry, DoaGrid, steering_grid

_TINY = 1e-12


@dataclass(frozen=True)
class TdoaEstimate:
    tdoa_samples: float
    angle_deg: float | None  # arc angle from 0 to 180 degrees, None without a mic distance


def gcc_phat(
    Xp,
    Xq,
    fs: float,
    fft_size: int,
    max_tdoa_samples: float | None = None,
    mic_distance: float | None = None,
    speed_of_sound: float = 343.0,
) -> TdoaEstimate:
    """TDOA between two channels from their STFTs ([T, K] each).

    The TDOA is positive when channel q lags channel p. The arc angle is
    measured from the axis pointing from mic q to mic p.
    """
    Xp = np.asarray(Xp)
    Xq = np.asarray(Xq)
    if Xp.shape != Xq.shape:
        raise ValueError("channel spectrograms must have the same shape")
    if mic_distance is not None:
        limit = mic_distance * fs / speed_of_sound
        if max_tdoa_samples is None:
            max_tdoa_samples = limit
        elif max_tdoa_samples > limit + 1e-9:
            warnings.warn(f"max_tdoa {max_tdoa_samples} exceeds the physical limit {limit:.3f} samples")
    G = np.sum(Xp * Xq.conj(), axis=0)
    mag = np.abs(G)
    if not np.any(mag >= _TINY):
        raise ValueError("degenerate input: cross-spectrum is zero everywhere")
    phat = np.where(mag >= _TINY, G / np.maximum(mag, _TINY), 0.0)
    cc = np.fft.irfft(phat, n=fft_size)
    max_lag = fft_size // 2 - 1
    if max_tdoa_samples is not None:
        max_lag = min(max_lag, int(np.ceil(max_tdoa_samples)))
    lags = np.arange(-max_lag, max_lag + 1)
    # cc peaks at -D when q = p delayed by D
    vals = cc[(-lags) % fft_size]
    i = int(np.argmax(vals))
    shift = 0.0
    if 0 < i < len(vals) - 1:
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        den = y0 - 2 * y1 + y2
        if den < 0:
            shift = 0.5 * (y0 - y2) / den
    tdoa = float(lags[i] + shift)
    angle = None
    if mic_distance is not None:
        cos_t = np.clip(tdoa * speed_of_sound / (fs * mic_distance), -1.0, 1.0)
        angle = float(np.rad2deg(np.arccos(cos_t)))
    return TdoaEstimate(tdoa, angle)


def _grid_steering(geometry, grid, freqs, band, precomputed):
    if precomputed is None:
        return steering_grid(geometry, grid, freqs[band])
    precomputed = np.asarray(precomputed)
    if precomputed.shape[:2] != (len(grid), len(freqs)):
        raise ValueError("precomputed grid steering must have shape [G, K_all, M]")
    return precomputed[:, band]


def _band(freqs, freq_range):
    if freq_range is None:
        return np.ones(len(freqs), dtype=bool)
    lo, hi = freq_range
    return (freqs >= lo) & (freqs <= hi)


@dataclass(frozen=True)
class DoaResult:
    directions: np.ndarray  # [n_sources, 3]
    indices: tuple
    power: np.ndarray  # [G]


def srp_phat(
    scm: SpatialCovariance,
    geometry: ArrayGeometry,
    grid: DoaGrid,
    freqs=None,
    freq_range=None,
    grid_steering=None,
) -> DoaResult:
    """Steered-response power with phase transform over ``grid``.

    E(u) = Re sum_{p<q} sum_k (R_pq / |R_pq|) conj(A_p(k,u) A_q(k,u)^*). The
    conjugated pair phase matches the observation model X = A S, under which
    R_pq carries the phase of A_p A_q^* for the true direction.

    ``grid_steering`` may hold :func:`steering_grid` over all bins of ``scm``
    to avoid recomputing it on repeated scans.
    """
    R = scm.R
    m = R.shape[1]
    if m < 2:
        raise ValueError("SRP-PHAT needs at least two microphones")
    freqs = scm.freqs if freqs is None else np.asarray(freqs)
    band = _band(freqs, freq_range)
    R = R[band]
    mag = np.abs(R)
    Rn = np.where(mag >= _TINY, R / np.maximum(mag, _TINY), 0.0)
    Rn = np.triu(Rn, k=1)
    A = _grid_steering(geometry, grid, freqs, band, grid_steering)  # [G, K, M]
    RA = np.matmul(Rn[None], A[..., None])[..., 0]
    power = np.einsum("gkp,gkp->g", A.conj(), RA).real
    best = int(np.argmax(power))
    return DoaResult(grid.directions[[best]], (best,), power)


def _pick_peaks(power, grid: DoaGrid, n: int, min_sep_deg: float):
    order = np.argsort(-power, kind="stable")
    chosen: list[int] = []
    cos_sep = np.cos(np.deg2rad(min_sep_deg))
    for g in order:
        if all(grid.directions[g] @ grid.directions[c] < cos_sep for c in chosen):
            chosen.append(int(g))
            if len(chosen) == n:
                break
    return chosen


def music(
    scm: SpatialCovariance,
    geometry: ArrayGeometry,
    grid: DoaGrid,
    n_sources: int = 1,
    freqs=None,
    freq_range=(300.0, 4000.0),
    min_separation_deg: float = 10.0,
    grid_steering=None,
) -> DoaResult:
    """Broadband MUSIC pseudo-spectrum summed over the frequency band.

    E(u) = sum_k A^H A / sqrt(A^H U U^H A) with U the eigenvectors of the
    M - n_sources smallest eigenvalues of R[k].
    """
    R = scm.R
    m = R.shape[1]
    if not 1 <= n_sources < m:
        raise ValueError(f"n_sources must be in [1, {m - 1}], got {n_sources}")
    if not is_hermitian(R, 1e-8):
        raise ValueError("MUSIC needs Hermitian spatial covariance matrices")
    freqs = scm.freqs if freqs is None else np.asarray(freqs)
    band = _band(freqs, freq_range)
    _, V = np.linalg.eigh(R[band])
    U = V[:, :, : m - n_sources]  # eigh sorts ascending
    A = _grid_steering(geometry, grid, freqs, band, grid_steering)  # [G, K, M]
    num = np.einsum("gkm,gkm->gk", A.conj(), A).real
    proj = np.matmul(A.conj()[:, :, None, :], U[None])[:, :, 0, :]  # [G, K, S]
    den = np.einsum("gks,gks->gk", proj, proj.conj()).real
    power = np.sum(num / np.sqrt(np.maximum(den, _TINY)), axis=1)
    idx = _pick_peaks(power, grid, n_sources, min_separation_deg)
    return DoaResult(grid.directions[idx], tuple(idx), power)

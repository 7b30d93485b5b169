"""Frequency-domain beamformers: delay-and-sum, MVDR and GEV."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariance import SpatialCovariance
from .geometry import SteeringField
from .stft import Spectrogram

DIAG_LOAD = 1e-6


@dataclass(frozen=True)
class BeamformerWeights:
    W: np.ndarray  # [K, M]
    flagged_bins: tuple = field(default=())


def _loaded(R: np.ndarray, eps: float) -> np.ndarray:
    m = R.shape[-1]
    tr = np.trace(R, axis1=-2, axis2=-1).real / m
    return R + (eps * tr)[:, None, None] * np.eye(m)


def delay_and_sum(steer: SteeringField) -> BeamformerWeights:
    A = steer.A
    return BeamformerWeights(A / A.shape[1])


def mvdr(scm: SpatialCovariance, steer: SteeringField, diag_load: float = DIAG_LOAD) -> BeamformerWeights:
    """W(k) = R^-1 A / (A^H R^-1 A) with R loaded by ``diag_load * trace / M``.

    Bins where the loaded matrix is not positive definite fall back to
    delay-and-sum and are reported in ``flagged_bins``.
    """
    A = steer.A
    R = _loaded(scm.R, diag_load)
    if R.shape[0] != A.shape[0] or R.shape[1] != A.shape[1]:
        raise ValueError(f"SCM {R.shape} and steering {A.shape} disagree")
    W = A / A.shape[1]
    flagged = []
    for k in range(R.shape[0]):
        try:
            np.linalg.cholesky(R[k])
        except np.linalg.LinAlgError:
            flagged.append(k)
            continue
        x = np.linalg.solve(R[k], A[k])
        den = np.vdot(A[k], x)
        if not np.isfinite(den) or abs(den) == 0:
            flagged.append(k)
            continue
        W[k] = x / den
    return BeamformerWeights(W, tuple(flagged))


def gev(scm_ss: SpatialCovariance, scm_nn: SpatialCovariance, diag_load: float = DIAG_LOAD) -> BeamformerWeights:
    """Principal generalised eigenvector of (R_SS, R_NN) per bin.

    R_NN is loaded, Cholesky-whitened (L L^H), the whitened R_SS is
    eigendecomposed and the top eigenvector mapped back through L^-H. Output
    vectors have unit norm and a real non-negative first coefficient.
    """
    Rs = scm_ss.R
    Rn = _loaded(scm_nn.R, diag_load)
    if Rs.shape != Rn.shape:
        raise ValueError(f"speech SCM {Rs.shape} and noise SCM {Rn.shape} disagree")
    try:
        L = np.linalg.cholesky(Rn)
    except np.linalg.LinAlgError as exc:
        raise ValueError("noise SCM is not positive definite after loading") from exc
    Linv_Rs = np.linalg.solve(L, Rs)
    C = np.linalg.solve(L, Linv_Rs.conj().transpose(0, 2, 1)).conj().transpose(0, 2, 1)
    C = 0.5 * (C + C.conj().transpose(0, 2, 1))
    _, V = np.linalg.eigh(C)
    v = V[:, :, -1]
    LH = L.conj().transpose(0, 2, 1)
    W = np.linalg.solve(LH, v[..., None])[..., 0]
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    ref = W[:, :1]
    phase = np.where(np.abs(ref) > 0, ref.conj() / np.maximum(np.abs(ref), 1e-300), 1.0)
    return BeamformerWeights(W * phase)


def apply_beamformer(weights: BeamformerWeights, spec: Spectrogram) -> Spectrogram:
    """Y(t, k) = W(k)^H X(t, k); returns a single-channel spectrogram."""
    W = weights.W
    X = spec.X
    if W.shape != (X.shape[2], X.shape[0]):
        raise ValueError(f"weights {W.shape} do not match spectrogram bins x mics {(X.shape[2], X.shape[0])}")
    Y = np.einsum("km,mtk->tk", W.conj(), X)
    return spec.with_data(Y[None])

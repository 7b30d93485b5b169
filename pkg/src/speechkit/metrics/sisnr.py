"""Scale-invariant SNR and its improvement over the mixture."""

from __future__ import annotations

import numpy as np

# residual energy below this fraction of the target energy counts as exact
_EXACT = 1e-28


def si_snr(s, s_hat) -> float:
    """SI-SNR in dB of estimate ``s_hat`` against reference ``s``.

    Both signals are mean-removed and divided by their standard deviation
    first. Returns ``inf`` when the estimate has no residual.
    """
    s = np.asarray(s, dtype=np.float64).ravel()
    s_hat = np.asarray(s_hat, dtype=np.float64).ravel()
    if s.shape != s_hat.shape:
        raise ValueError(f"length mismatch: {s.size} vs {s_hat.size}")
    s = s - s.mean()
    s_hat = s_hat - s_hat.mean()
    s_std = s.std()
    if s_std == 0:
        raise ValueError("reference has zero energy after mean removal")
    s = s / s_std
    h_std = s_hat.std()
    if h_std > 0:
        s_hat = s_hat / h_std
    target = (s_hat @ s) / (s @ s) * s
    noise = s_hat - target
    t_energy = target @ target
    n_energy = noise @ noise
    if n_energy <= _EXACT * t_energy:
        return float("inf")
    if t_energy == 0:
        return float("-inf")
    return float(10.0 * np.log10(t_energy / n_energy))


def si_snri(s, s_hat, x) -> float:
    """SI-SNR(s, s_hat) - SI-SNR(s, x) in dB."""
    return si_snr(s, s_hat) - si_snr(s, x)

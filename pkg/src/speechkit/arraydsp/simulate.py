"""Synthetic far-field array signals for tests, demos and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import ArrayGeometry, delays


def plane_wave(source, geometry: ArrayGeometry, u, fs: float) -> np.ndarray:
    """Observe ``source`` from direction ``u`` on every mic; returns [M, N].

    Delays are applied as exact (circular) phase shifts of the full-length
    FFT, so X_p(f) = exp(-j 2 pi f tau_p) S(f) matches the steering model.
    """
    s = np.asarray(source, dtype=np.float64)
    n = s.size
    S = np.fft.rfft(s)
    f = np.fft.rfftfreq(n, 1.0 / fs)
    tau = delays(geometry, u)
    return np.fft.irfft(S[None, :] * np.exp(-2j * np.pi * f[None, :] * tau[:, None]), n=n, axis=1)


def diffuse_noise(n_samples: int, geometry: ArrayGeometry, fs: float, rng, n_directions: int = 64) -> np.ndarray:
    """Approximately spherically isotropic noise: independent white plane waves
    from random directions, unit mean power per mic."""
    u = rng.normal(size=(n_directions, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    S = np.fft.rfft(rng.normal(size=(n_directions, n_samples)), axis=1)  # [D, F]
    f = np.fft.rfftfreq(n_samples, 1.0 / fs)
    tau = -(u @ geometry.positions.T) / geometry.speed_of_sound  # [D, M]
    X = np.einsum("df,dmf->mf", S, np.exp(-2j * np.pi * tau[:, :, None] * f[None, None, :]))
    out = np.fft.irfft(X, n=n_samples, axis=1)
    return out / np.sqrt(np.mean(out ** 2))


def scale_to_snr(signal, noise, snr_db: float):
    """Scale ``noise`` so that signal power / noise power equals ``snr_db``."""
    ps = np.mean(np.asarray(signal) ** 2)
    pn = np.mean(np.asarray(noise) ** 2)
    return noise * np.sqrt(ps / (pn * 10 ** (snr_db / 10)))

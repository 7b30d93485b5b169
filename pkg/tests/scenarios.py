"""Synthetic scenarios shared by the metric and DSP tests and the acceptance suite."""

import warnings

import numpy as np
from scipy.signal import butter, sosfiltfilt

from speechkit.arraydsp import (ArrayGeometry, ColaWarning, apply_beamformer, compute_scm, istft,
                                mvdr, steering, stft, unit_vector)
from speechkit.arraydsp.simulate import plane_wave, scale_to_snr
from speechkit.metrics import si_snr

FS = 16000


def band_noise(rng, n, lo=300.0, hi=7000.0, fs=FS):
    sos = butter(6, [lo, hi], btype="band", fs=fs, output="sos")
    return sosfiltfilt(sos, rng.normal(size=n))


def quiet_stft(x, fs=FS, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ColaWarning)
        return stft(x, fs, **kw)


def interferer_scenario(seed=0, target_az=30.0, interferer_az=90.0, sensor_snr_db=30.0, seconds=2.0):
    """8-mic circle, one target and one interferer at 0 dB input SIR.

    Returns a dict with the MVDR output SIR (dB, from the separately
    beamformed target and interferer components) and the SI-SNRi of the
    resynthesised output over the best input channel.
    """
    rng = np.random.default_rng(seed)
    geo = ArrayGeometry.circular(8, 0.1)
    n = int(seconds * FS)
    tgt = plane_wave(band_noise(rng, n), geo, unit_vector(target_az), FS)
    itf = plane_wave(band_noise(rng, n), geo, unit_vector(interferer_az), FS)
    itf = scale_to_snr(tgt, itf, 0.0)
    sensor = scale_to_snr(tgt, rng.normal(size=tgt.shape), sensor_snr_db)
    mix = tgt + itf + sensor
    spec, spec_t, spec_i = quiet_stft(mix), quiet_stft(tgt), quiet_stft(itf)
    steer = steering(geo, unit_vector(target_az), spec.freqs, reference_mic=0)
    w = mvdr(compute_scm(spec), steer)
    yt = apply_beamformer(w, spec_t).X
    yi = apply_beamformer(w, spec_i).X
    sir = 10 * np.log10(np.sum(np.abs(yt) ** 2) / np.sum(np.abs(yi) ** 2))
    out = istft(apply_beamformer(w, spec))[0]
    best_in = max(si_snr(tgt[0], mix[m]) for m in range(geo.n_mics))
    return {"sir_db": float(sir), "si_snri_db": float(si_snr(tgt[0], out) - best_in),
            "weights": w, "steer": steer}


def diarization_scenario(rng, n_ref=3, n_hyp=None, span_ms=20_000):
    """Random reference/hypothesis speaker turns on whole milliseconds."""
    def segs(n_spk, prefix):
        out = []
        for k in range(n_spk):
            t = int(rng.integers(0, 2000))
            while t < span_ms:
                dur = int(rng.integers(300, 4000))
                out.append((t / 1000, (t + dur) / 1000, f"{prefix}{k}"))
                t += dur + int(rng.integers(200, 5000))
        return out

    n_hyp = n_hyp if n_hyp is not None else int(rng.integers(2, 5))
    return segs(n_ref, "r"), segs(n_hyp, "h")


def orthogonal_noise(s, rng, ratio):
    """Zero-mean noise orthogonal to mean-removed ``s`` with ||s||^2 / ||n||^2 = ratio."""
    s0 = s - s.mean()
    n = rng.normal(size=s.size)
    n -= n.mean()
    n -= (n @ s0) / (s0 @ s0) * s0
    n -= n.mean()
    return n * np.sqrt((s0 @ s0) / ratio / (n @ n))


def random_pd(rng, m, k=1):
    X = rng.normal(size=(k, m, 2 * m)) + 1j * rng.normal(size=(k, m, 2 * m))
    return X @ X.conj().transpose(0, 2, 1) / (2 * m)


def unit_modulus(rng, k, m):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, size=(k, m)))

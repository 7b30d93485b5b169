"""Multichannel STFT and overlap-add inverse."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window


class ColaWarning(UserWarning):
    """The window/hop pair does not sum to a constant; output is renormalised."""


@dataclass(frozen=True)
class Spectrogram:
    X: np.ndarray  # [M, T, K] complex
    fs: float
    frame_length: int
    hop_length: int
    fft_size: int
    window: str
    n_samples: int

    @property
    def n_channels(self) -> int:
        return self.X.shape[0]

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.rfftfreq(self.fft_size, 1.0 / self.fs)

    def with_data(self, X: np.ndarray) -> "Spectrogram":
        return Spectrogram(X, self.fs, self.frame_length, self.hop_length, self.fft_size,
                           self.window, self.n_samples)


def _n_frames(n_samples: int, frame: int, hop: int) -> int:
    if n_samples <= frame:
        return 1
    return 1 + int(np.ceil((n_samples - frame) / hop))


def is_cola(window: np.ndarray, hop: int, rtol: float = 1e-8) -> bool:
    """Classic constant-overlap-add check on the analysis window."""
    acc = np.zeros(hop)
    for start in range(0, len(window), hop):
        chunk = window[start:start + hop]
        acc[:len(chunk)] += chunk
    return bool(np.ptp(acc) <= rtol * np.max(np.abs(acc)))


def stft(
    audio,
    fs: float,
    frame_ms: float = 25.0,
    hop_ms: float = 10.0,
    window: str = "hann",
    fft_size: int | None = None,
) -> Spectrogram:
    """STFT of ``audio`` ([M, N] or [N]); returns X with shape [M, T, K].

    The signal is zero-padded by ``frame - hop`` samples on both sides so every
    input sample is covered by the same number of frames.
    """
    x = np.atleast_2d(np.asarray(audio, dtype=np.float64))
    frame = int(round(frame_ms * fs / 1000.0))
    hop = int(round(hop_ms * fs / 1000.0))
    if hop < 1 or frame < hop:
        raise ValueError(f"need frame >= hop >= 1 samples, got frame={frame} hop={hop}")
    n_fft = fft_size or 1 << (frame - 1).bit_length()
    if n_fft < frame:
        raise ValueError(f"fft_size {n_fft} shorter than frame {frame}")
    win = get_window(window, frame, fftbins=True)
    if not is_cola(win, hop):
        warnings.warn(f"{window} window of {frame} samples is not COLA at hop {hop}; "
                      "the inverse renormalises by the summed window", ColaWarning, stacklevel=2)
    n = x.shape[1]
    lead = frame - hop
    t = _n_frames(n + 2 * lead, frame, hop)
    padded = np.zeros((x.shape[0], (t - 1) * hop + frame))
    padded[:, lead:lead + n] = x
    idx = np.arange(frame)[None, :] + hop * np.arange(t)[:, None]
    frames = padded[:, idx] * win  # [M, T, frame]
    X = np.fft.rfft(frames, n=n_fft, axis=-1)
    return Spectrogram(X, float(fs), frame, hop, n_fft, window, n)


def istft(spec: Spectrogram) -> np.ndarray:
    """Weighted overlap-add inverse; returns [M, n_samples].

    Frames are re-windowed and the sum divided by the summed squared window,
    which reconstructs exactly wherever that sum is above 1e-3 of its peak.
    Below that (only near the signal ends for non-COLA pairs) the divisor is
    floored, tapering the output instead of amplifying frame errors.
    """
    win = get_window(spec.window, spec.frame_length, fftbins=True)
    frames = np.fft.irfft(spec.X, n=spec.fft_size, axis=-1)[..., :spec.frame_length]
    m, t, _ = spec.X.shape
    total = (t - 1) * spec.hop_length + spec.frame_length
    out = np.zeros((m, total))
    norm = np.zeros(total)
    for i in range(t):
        s = i * spec.hop_length
        out[:, s:s + spec.frame_length] += frames[:, i] * win
        norm[s:s + spec.frame_length] += win * win
    out /= np.maximum(norm, 1e-3 * norm.max())
    lead = spec.frame_length - spec.hop_length
    return out[:, lead:lead + spec.n_samples]

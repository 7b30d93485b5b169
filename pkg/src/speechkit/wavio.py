"""WAV reading and writing for PCM16 and float32, mono or multichannel."""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile


def read_wav(path) -> tuple[np.ndarray, int]:
    """Return ``(audio [channels, samples] float64 in [-1, 1], fs)``."""
    fs, data = wavfile.read(path)
    if data.dtype == np.int16:
        audio = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        audio = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        audio = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype.kind == "f":
        audio = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample type {data.dtype}")
    audio = audio[None, :] if audio.ndim == 1 else audio.T
    return np.ascontiguousarray(audio), int(fs)


def write_wav(path, audio, fs: int, subtype: str = "float32") -> None:
    """Write ``audio`` shaped [samples] or [channels, samples].

    ``subtype`` is ``"float32"`` or ``"pcm16"``; PCM output is clipped.
    """
    audio = np.asarray(audio, dtype=np.float64)
    if audio.ndim == 2:
        audio = audio.T
    elif audio.ndim != 1:
        raise ValueError(f"audio must be 1-D or [channels, samples], got shape {audio.shape}")
    if subtype == "float32":
        data = audio.astype(np.float32)
    elif subtype == "pcm16":
        data = np.round(np.clip(audio, -1.0, 32767 / 32768) * 32768.0).astype(np.int16)
    else:
        raise ValueError(f"unknown WAV subtype {subtype!r}")
    wavfile.write(path, int(fs), np.ascontiguousarray(data))

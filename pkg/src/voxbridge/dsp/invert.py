"""Deterministic log-mel inversion: pseudo-inverse filterbank + phase refinement."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .mel import hann_window, mel_filterbank, stft
from .params import HOP, N_FFT, WIN, synthesis_length


@lru_cache(maxsize=1)
def _pinv_filterbank() -> np.ndarray:
    return np.linalg.pinv(mel_filterbank())


def istft(spectra: np.ndarray, length: int | None = None) -> np.ndarray:
    """Overlap-add inverse of `stft`; output trimmed/padded to `length`."""
    frames = spectra.shape[0]
    if length is None:
        length = synthesis_length(frames)
    window = hann_window()
    pad = WIN // 2
    buf = np.zeros((frames - 1) * HOP + WIN)
    norm = np.zeros_like(buf)
    for t in range(frames):
        seg = np.fft.irfft(spectra[t], n=N_FFT)[:WIN]
        buf[t * HOP:t * HOP + WIN] += seg * window
        norm[t * HOP:t * HOP + WIN] += window * window
    buf /= np.maximum(norm, 1e-12)
    out = buf[pad:pad + length]
    if out.size < length:
        out = np.pad(out, (0, length - out.size))
    return out


def griffin_lim(mel: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Waveform from a log-mel matrix; zero-phase init so runs are identical.

    Output peak is normalized to at most 0.95.
    """
    mel = np.asarray(mel, dtype=np.float64)
    if mel.ndim != 2:
        raise ValueError("expected a (frames, bins) log-mel matrix")
    magnitude = np.clip(np.exp(mel) @ _pinv_filterbank().T, 0.0, None)
    length = synthesis_length(mel.shape[0])
    phase = np.zeros_like(magnitude)
    for _ in range(iterations):
        wave = istft(magnitude * np.exp(1j * phase), length)
        phase = np.angle(stft(wave))
    wave = istft(magnitude * np.exp(1j * phase), length)
    peak = np.max(np.abs(wave))
    if peak > 1e-12:
        wave = wave * min(1.0, 0.95 / peak)
    return wave

"""STFT and log-mel spectrogram extraction."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .params import (
    AMP_FLOOR, HOP, MEL_FMAX, MEL_FMIN, N_FFT, N_MELS, SAMPLE_RATE, WIN,
    frame_count,
)


def hann_window(n: int = WIN) -> np.ndarray:
    """Periodic Hann; sums to a constant when overlapped at hop = n/4."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=4)
def mel_filterbank(n_mels: int = N_MELS, n_fft: int = N_FFT,
                   fmin: float = MEL_FMIN, fmax: float = MEL_FMAX) -> np.ndarray:
    """Triangular filters (n_mels, n_fft//2+1), unit peak, mel-spaced."""
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / SAMPLE_RATE)
    fb = np.zeros((n_mels, freqs.size))
    for i in range(n_mels):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (freqs - lo) / (center - lo)
        falling = (hi - freqs) / (hi - center)
        fb[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def mel_center_frequencies(n_mels: int = N_MELS) -> np.ndarray:
    edges = mel_to_hz(np.linspace(hz_to_mel(MEL_FMIN), hz_to_mel(MEL_FMAX),
                                  n_mels + 2))
    return edges[1:-1]


def center_pad(waveform: np.ndarray) -> np.ndarray:
    pad = WIN // 2
    # reflect padding needs at least pad+1 samples; fall back to symmetric
    mode = "reflect" if waveform.size > pad else "symmetric"
    if waveform.size == 1:
        return np.pad(waveform, pad, mode="edge")
    return np.pad(waveform, pad, mode=mode)


def stft(waveform: np.ndarray) -> np.ndarray:
    """Complex spectra, shape (frames, n_fft//2+1); frame t starts at t*HOP.

    The waveform is center-padded by WIN//2 so frame t is centered on
    sample t*HOP and the frame count is len(waveform)//HOP + 1.
    """
    waveform = np.asarray(waveform, dtype=np.float64)
    if waveform.ndim != 1 or waveform.size == 0:
        raise ValueError("stft expects a non-empty 1-D waveform")
    frames = frame_count(waveform.size)
    padded = center_pad(waveform)
    window = hann_window()
    out = np.empty((frames, N_FFT // 2 + 1), dtype=np.complex128)
    for t in range(frames):
        seg = padded[t * HOP:t * HOP + WIN]
        if seg.size < WIN:  # trailing frame can run past the pad
            seg = np.pad(seg, (0, WIN - seg.size))
        out[t] = np.fft.rfft(seg * window, n=N_FFT)
    return out


def mel_spectrogram(waveform: np.ndarray) -> np.ndarray:
    """Log-mel magnitudes, shape (frames, 80), floor-clamped at ln(1e-5)."""
    waveform = np.asarray(waveform, dtype=np.float64)
    if waveform.size == 0:
        raise ValueError("empty waveform")
    peak = np.max(np.abs(waveform))
    if peak > 1.0 + 1e-9:
        raise ValueError(f"waveform amplitude {peak:.4f} outside [-1, 1]")
    magnitude = np.abs(stft(waveform))
    mel = magnitude @ mel_filterbank().T
    return np.log(np.maximum(mel, AMP_FLOOR))


def frame_energy(mel: np.ndarray) -> np.ndarray:
    """Per-frame L2 norm of a log-mel matrix."""
    return np.linalg.norm(np.asarray(mel, dtype=np.float64), axis=1)

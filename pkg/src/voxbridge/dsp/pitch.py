"""Autocorrelation pitch tracking on the mel frame grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mel import center_pad
from .params import HOP, SAMPLE_RATE, WIN, frame_count

VOICING_THRESHOLD = 0.5
# prefer the shortest lag among peaks close to the best one (octave guard)
PEAK_TOLERANCE = 0.9
SILENCE_RMS = 1e-5


@dataclass
class F0Track:
    """Per-frame pitch: raw Hz (0 when unvoiced), voicing, normalized contour.

    `degenerate` marks tracks with fewer than 2 voiced frames, whose
    normalized field is all zeros by convention.
    """

    f0_hz: np.ndarray
    voiced: np.ndarray
    normalized: np.ndarray = field(default=None)
    degenerate: bool = False

    def __post_init__(self):
        self.f0_hz = np.asarray(self.f0_hz, dtype=np.float64)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        if self.normalized is None:
            self.normalized = np.zeros_like(self.f0_hz)
        else:
            self.normalized = np.asarray(self.normalized, dtype=np.float64)

    @property
    def frames(self) -> int:
        return self.f0_hz.size


def _frame_ncc(segment: np.ndarray, lag_min: int, lag_max: int):
    """Normalized autocorrelation over [lag_min, lag_max] for one frame."""
    w = segment.size
    n_fft = 1
    while n_fft < 2 * w:
        n_fft *= 2
    spectrum = np.fft.rfft(segment, n=n_fft)
    raw = np.fft.irfft(spectrum * np.conj(spectrum), n=n_fft)[:lag_max + 1]
    sq = np.concatenate([[0.0], np.cumsum(segment * segment)])
    lags = np.arange(lag_min, lag_max + 1)
    e_head = sq[w - lags]                # energy of x[0 : w-lag]
    e_tail = sq[w] - sq[lags]            # energy of x[lag : w]
    denom = np.sqrt(np.maximum(e_head * e_tail, 1e-30))
    return raw[lag_min:lag_max + 1] / denom, lags


def estimate_f0(waveform: np.ndarray, fmin: float = 60.0,
                fmax: float = 400.0) -> F0Track:
    """Pitch track on the same frame grid as the mel extractor.

    A frame is voiced when its best normalized autocorrelation peak in
    the lag range reaches 0.5; raw F0 is 0 on unvoiced frames. The
    normalized field is left zeroed; run interpolate_and_normalize to
    fill it.
    """
    waveform = np.asarray(waveform, dtype=np.float64)
    if fmin >= fmax:
        raise ValueError(f"fmin {fmin} must be below fmax {fmax}")
    if waveform.size < WIN:
        raise ValueError(f"waveform shorter than one analysis window ({WIN})")
    lag_min = int(np.ceil(SAMPLE_RATE / fmax))
    lag_max = int(SAMPLE_RATE / fmin)
    frames = frame_count(waveform.size)
    padded = center_pad(waveform)
    f0 = np.zeros(frames)
    voiced = np.zeros(frames, dtype=bool)
    for t in range(frames):
        seg = padded[t * HOP:t * HOP + WIN]
        if seg.size < WIN:
            seg = np.pad(seg, (0, WIN - seg.size))
        if np.sqrt(np.mean(seg * seg)) < SILENCE_RMS:
            continue
        ncc, lags = _frame_ncc(seg, lag_min, lag_max)
        interior = np.arange(1, ncc.size - 1)
        is_peak = (ncc[interior] > ncc[interior - 1]) & \
                  (ncc[interior] >= ncc[interior + 1])
        peaks = interior[is_peak]
        if peaks.size == 0:
            continue
        best = float(np.max(ncc[peaks]))
        if best < VOICING_THRESHOLD:
            continue
        ok = peaks[ncc[peaks] >= max(VOICING_THRESHOLD, PEAK_TOLERANCE * best)]
        lag = int(lags[ok[0]])
        voiced[t] = True
        f0[t] = SAMPLE_RATE / lag
    return F0Track(f0_hz=f0, voiced=voiced)


def interpolate_and_normalize(track: F0Track) -> F0Track:
    """Fill unvoiced gaps linearly, then z-score the whole contour.

    Edge gaps hold the nearest voiced value. Tracks with fewer than two
    voiced frames (or zero variance) get an all-zero normalized field
    and the degenerate flag.
    """
    voiced_idx = np.flatnonzero(track.voiced)
    if voiced_idx.size < 2:
        return F0Track(track.f0_hz.copy(), track.voiced.copy(),
                       np.zeros_like(track.f0_hz), degenerate=True)
    frames = np.arange(track.frames)
    interp = np.interp(frames, voiced_idx, track.f0_hz[voiced_idx])
    std = float(np.std(interp))
    if std < 1e-12:
        return F0Track(track.f0_hz.copy(), track.voiced.copy(),
                       np.zeros_like(interp), degenerate=False)
    normalized = (interp - float(np.mean(interp))) / std
    return F0Track(track.f0_hz.copy(), track.voiced.copy(), normalized)

"""File formats: 16-bit PCM WAV, binary mel matrices, binary pitch tracks."""

from __future__ import annotations

import struct
import wave
from pathlib import Path

import numpy as np

from .params import SAMPLE_RATE
from .pitch import F0Track

MEL_MAGIC = b"FMEL"
F0_MAGIC = b"FF0T"


def write_wav(path, waveform: np.ndarray, sample_rate: int = SAMPLE_RATE) -> None:
    """Mono 16-bit PCM; samples clipped to [-1, 1]."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = np.clip(np.asarray(waveform, dtype=np.float64), -1.0, 1.0)
    pcm = (samples * 32767.0).round().astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(pcm.tobytes())


def read_wav(path) -> np.ndarray:
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected mono 16-bit PCM")
        if fh.getframerate() != SAMPLE_RATE:
            raise ValueError(f"{path}: expected {SAMPLE_RATE} Hz")
        raw = fh.readframes(fh.getnframes())
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0


def write_mel(path, mel: np.ndarray) -> None:
    """Binary mel file: magic, u32 frames, u32 bins, f32 row-major payload."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mel = np.ascontiguousarray(mel, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(MEL_MAGIC)
        fh.write(struct.pack("<II", mel.shape[0], mel.shape[1]))
        fh.write(mel.astype("<f4").tobytes())


def read_mel(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != MEL_MAGIC:
            raise ValueError(f"{path}: not a mel file (bad magic)")
        frames, bins = struct.unpack("<II", fh.read(8))
        payload = fh.read(4 * frames * bins)
    if len(payload) != 4 * frames * bins:
        raise ValueError(f"{path}: truncated mel payload")
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(frames, bins)


def read_mel_frames(path) -> int:
    """Frame count from the header alone; no payload read."""
    with open(path, "rb") as fh:
        if fh.read(4) != MEL_MAGIC:
            raise ValueError(f"{path}: not a mel file (bad magic)")
        frames, _ = struct.unpack("<II", fh.read(8))
    return frames


def write_f0(path, track: F0Track) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = track.frames
    with open(path, "wb") as fh:
        fh.write(F0_MAGIC)
        fh.write(struct.pack("<IB", n, 1 if track.degenerate else 0))
        fh.write(track.f0_hz.astype("<f8").tobytes())
        fh.write(track.voiced.astype("u1").tobytes())
        fh.write(track.normalized.astype("<f8").tobytes())


def read_f0(path) -> F0Track:
    with open(path, "rb") as fh:
        if fh.read(4) != F0_MAGIC:
            raise ValueError(f"{path}: not a pitch-track file (bad magic)")
        n, degenerate = struct.unpack("<IB", fh.read(5))
        f0 = np.frombuffer(fh.read(8 * n), dtype="<f8")
        voiced = np.frombuffer(fh.read(n), dtype="u1").astype(bool)
        norm = np.frombuffer(fh.read(8 * n), dtype="<f8")
    return F0Track(f0.copy(), voiced.copy(), norm.copy(), bool(degenerate))

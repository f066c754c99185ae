"""Per-frame conditioning for the voice-conversion flow.

A frame's conditioning concatenates: a trainable phoneme embedding (looked
up per frame after expanding phonemes by their durations), the locale's
accent one-hot, the speaker embedding (constant across the utterance),
the normalized F0 value, and the voiced flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEAKER_DIM = 32
EXTRA_DIMS = 2  # normalized F0 + voiced flag


@dataclass
class Conditioning:
    """Split representation: trainable lookup rows plus a constant block."""

    phoneme_rows: np.ndarray  # (frames,) int rows into the phoneme table
    static: np.ndarray        # (frames, accent_count + 34)
    accent_count: int

    def __post_init__(self):
        self.phoneme_rows = np.asarray(self.phoneme_rows, dtype=np.int64)
        self.static = np.asarray(self.static, dtype=np.float64)
        if self.phoneme_rows.shape[0] != self.static.shape[0]:
            raise ValueError("conditioning blocks disagree on frame count")
        onehot = self.static[:, :self.accent_count]
        if self.static.shape[0] and not np.allclose(onehot.sum(axis=1), 1.0):
            raise ValueError("accent one-hot rows must sum to 1")

    @property
    def frames(self) -> int:
        return int(self.phoneme_rows.shape[0])

    def crop(self, start: int, stop: int) -> "Conditioning":
        return Conditioning(self.phoneme_rows[start:stop],
                            self.static[start:stop], self.accent_count)


def expand_by_durations(values: np.ndarray, durations) -> np.ndarray:
    durations = np.asarray(durations, dtype=np.int64)
    if np.any(durations < 1):
        raise ValueError("durations must be positive")
    return np.repeat(np.asarray(values), durations, axis=0)


def build_conditioning(phonemes, durations, accent_index: int, accent_count: int,
                       phoneme_slots: int, speaker_embedding: np.ndarray,
                       f0_normalized: np.ndarray, voiced: np.ndarray) -> Conditioning:
    phonemes = np.asarray(phonemes, dtype=np.int64)
    if np.any(phonemes < 0) or np.any(phonemes >= phoneme_slots):
        raise ValueError(f"phoneme id outside [0, {phoneme_slots})")
    if not 0 <= accent_index < accent_count:
        raise ValueError(f"accent index {accent_index} outside 0..{accent_count - 1}")
    rows = expand_by_durations(accent_index * phoneme_slots + phonemes, durations)
    frames = rows.shape[0]
    f0_normalized = np.asarray(f0_normalized, dtype=np.float64).reshape(-1)
    voiced = np.asarray(voiced).astype(np.float64).reshape(-1)
    if f0_normalized.shape[0] != frames or voiced.shape[0] != frames:
        raise ValueError(
            f"conditioning frame mismatch: durations give {frames}, "
            f"F0 gives {f0_normalized.shape[0]}")
    embedding = np.asarray(speaker_embedding, dtype=np.float64).reshape(-1)
    if embedding.shape[0] != SPEAKER_DIM:
        raise ValueError(f"speaker embedding must have {SPEAKER_DIM} dims")
    onehot = np.zeros((frames, accent_count))
    onehot[:, accent_index] = 1.0
    static = np.concatenate([
        onehot,
        np.tile(embedding, (frames, 1)),
        f0_normalized[:, None],
        voiced[:, None],
    ], axis=1)
    return Conditioning(rows, static, accent_count)


def conditioning_for(manifest, utt, track, speaker_embedding,
                     phoneme_slots: int) -> Conditioning:
    """Conditioning for a manifest utterance with an explicit voice identity."""
    spec = manifest.locales[utt.locale]
    return build_conditioning(
        utt.phonemes, utt.durations, spec.accent_index, manifest.accent_count,
        phoneme_slots, speaker_embedding, track.normalized, track.voiced)

"""Per-dimension min/max feature standardization to [-1, 1].

Inference-time spectrogram cells can fall outside the fitted range, so
the forward transform clamps; the vocoder-input contract is bounded
features, not exact invertibility out of range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class Standardizer:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        self.minimum = np.asarray(self.minimum, dtype=np.float64)
        self.maximum = np.asarray(self.maximum, dtype=np.float64)
        if self.minimum.shape != self.maximum.shape:
            raise ValueError("min/max shape mismatch")
        if np.any(self.maximum < self.minimum):
            raise ValueError("per-dimension max must be >= min")

    @property
    def span(self) -> np.ndarray:
        return self.maximum - self.minimum

    def transform(self, mel: np.ndarray) -> np.ndarray:
        """Map fitted min -> -1 and max -> +1, clamping outside values."""
        mel = np.asarray(mel, dtype=np.float64)
        span = self.span
        degenerate = span <= 0.0
        safe = np.where(degenerate, 1.0, span)
        out = 2.0 * (mel - self.minimum) / safe - 1.0
        out = np.where(degenerate, 0.0, out)
        return np.clip(out, -1.0, 1.0)

    def inverse(self, scaled: np.ndarray) -> np.ndarray:
        scaled = np.asarray(scaled, dtype=np.float64)
        return self.minimum + (scaled + 1.0) * 0.5 * self.span

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({
            "minimum": self.minimum.tolist(),
            "maximum": self.maximum.tolist(),
        }))

    @classmethod
    def load(cls, path) -> "Standardizer":
        raw = json.loads(Path(path).read_text())
        return cls(np.array(raw["minimum"]), np.array(raw["maximum"]))


def fit_standardizer(mels) -> Standardizer:
    """Per-dimension min/max over a non-empty corpus of (frames, dims) mats."""
    mels = list(mels)
    if not mels:
        raise ValueError("cannot fit a standardizer on an empty corpus")
    stacked = np.concatenate([np.asarray(m, dtype=np.float64) for m in mels])
    return Standardizer(stacked.min(axis=0), stacked.max(axis=0))

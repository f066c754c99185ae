"""Deterministic, splittable random number generation.

Every stochastic component in the package draws from a Philox
counter-based generator keyed by an integer seed plus a path of string
labels, so independent subsystems get independent streams and any run
is reproducible from its seed alone.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_entropy(label: object) -> int:
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(seed: int, *path: object) -> np.random.SeedSequence:
    """SeedSequence for (seed, path); distinct paths give independent streams."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_label_entropy(p) for p in path]
    return np.random.SeedSequence(entropy)


def make_rng(seed: int, *path: object) -> np.random.Generator:
    """Philox generator keyed by seed and an arbitrary label path."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *path)))

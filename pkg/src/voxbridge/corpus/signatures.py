"""Mean-mel signatures and the nearest-centroid oracle.

The oracle gives an objective check that speaker identity and locale
content are both measurable in the corpus, and later that conversion moved
one without destroying the other.
"""

from __future__ import annotations

import numpy as np

from .types import CorpusManifest, Utterance


def mean_mel(mel: np.ndarray) -> np.ndarray:
    mel = np.asarray(mel, dtype=np.float64)
    if mel.ndim != 2 or mel.shape[0] == 0:
        raise ValueError(f"expected a non-empty (frames, bins) matrix, got {mel.shape}")
    return mel.mean(axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("zero-norm signature")
    return float(np.dot(a, b) / (na * nb))


def _group_key(utt: Utterance, by: str) -> str:
    if by == "speaker":
        return utt.speaker_id
    if by == "locale":
        return utt.locale
    raise ValueError(f"unknown grouping {by!r}")


def centroids(manifest: CorpusManifest, by: str = "speaker",
              mels: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """Per-group mean of utterance mean-mel signatures.

    mels overrides disk reads, keyed by utterance id; handy for corpora
    that only exist in memory.
    """
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for utt in manifest.utterances:
        mel = mels[utt.utterance_id] if mels is not None else manifest.load_mel(utt)
        sig = mean_mel(mel)
        key = _group_key(utt, by)
        if key not in sums:
            sums[key] = np.zeros_like(sig)
            counts[key] = 0
        sums[key] += sig
        counts[key] += 1
    return {key: sums[key] / counts[key] for key in sums}


def classify(signature: np.ndarray, table: dict[str, np.ndarray]) -> str:
    if not table:
        raise ValueError("empty centroid table")
    return max(table, key=lambda key: cosine(signature, table[key]))


def separability(manifest: CorpusManifest, by: str = "speaker") -> float:
    """Fraction of utterances the nearest-centroid classifier labels correctly."""
    table = centroids(manifest, by=by)
    hits = 0
    for utt in manifest.utterances:
        sig = mean_mel(manifest.load_mel(utt))
        if classify(sig, table) == _group_key(utt, by):
            hits += 1
    return hits / len(manifest.utterances)

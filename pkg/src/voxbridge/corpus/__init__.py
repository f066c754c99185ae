"""Synthetic corpus generation, manifest I/O, and signature oracles."""

from .generate import (
    CorpusConfig,
    CorpusSynthesizer,
    DURATION_MAX,
    DURATION_MIN,
    PHONEMES_PER_LOCALE,
    VOICED_PER_LOCALE,
    generate_corpus,
)
from .signatures import centroids, classify, cosine, mean_mel, separability
from .types import (
    CorpusIntegrityError,
    CorpusManifest,
    LocaleSpec,
    SpeakerProfile,
    Utterance,
    apply_external_embeddings,
    load_manifest,
    save_manifest,
)

__all__ = [
    "CorpusConfig",
    "CorpusIntegrityError",
    "CorpusManifest",
    "CorpusSynthesizer",
    "DURATION_MAX",
    "DURATION_MIN",
    "LocaleSpec",
    "PHONEMES_PER_LOCALE",
    "SpeakerProfile",
    "Utterance",
    "VOICED_PER_LOCALE",
    "apply_external_embeddings",
    "centroids",
    "classify",
    "cosine",
    "generate_corpus",
    "load_manifest",
    "mean_mel",
    "save_manifest",
    "separability",
]

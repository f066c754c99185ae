"""Four-stage build: conversion model, synthetic corpora, per-locale voices."""

from .config import PipelineConfig, config_from_dict, load_config
from .ledger import (
    STAGE_NAMES, PipelineError, StageLedger, StageRecord, digest_path,
    sha256_file, sha256_tree,
)
from .run import ensure_corpus, infer, run_pipeline, run_stage

__all__ = [
    "PipelineConfig",
    "PipelineError",
    "STAGE_NAMES",
    "StageLedger",
    "StageRecord",
    "config_from_dict",
    "digest_path",
    "ensure_corpus",
    "infer",
    "load_config",
    "run_pipeline",
    "run_stage",
    "sha256_file",
    "sha256_tree",
]

"""Conditional-flow voice conversion: model, training, and conversion."""

from .conditioning import (
    Conditioning,
    build_conditioning,
    conditioning_for,
    expand_by_durations,
)
from .convert import SyntheticUtterance, convert, convert_corpus, rescale_f0
from .model import FlowConfig, FlowModel
from .train import TrainedVC, VCTrainConfig, corpus_nll, train_vc

__all__ = [
    "Conditioning",
    "FlowConfig",
    "FlowModel",
    "SyntheticUtterance",
    "TrainedVC",
    "VCTrainConfig",
    "build_conditioning",
    "conditioning_for",
    "convert",
    "convert_corpus",
    "corpus_nll",
    "expand_by_durations",
    "rescale_f0",
    "train_vc",
]

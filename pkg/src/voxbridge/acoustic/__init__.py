"""Downstream single-speaker acoustic model and its training loop."""

from .config import AcousticConfig, VARIANTS
from .model import AcousticMeta, AcousticModel, expand_by_durations, param_count
from .train import (
    AcousticTrainConfig,
    TrainedAcoustic,
    example_loss,
    teacher_forced_l1,
    train_acoustic,
)

__all__ = [
    "AcousticConfig",
    "AcousticMeta",
    "AcousticModel",
    "AcousticTrainConfig",
    "TrainedAcoustic",
    "VARIANTS",
    "example_loss",
    "expand_by_durations",
    "param_count",
    "teacher_forced_l1",
    "train_acoustic",
]

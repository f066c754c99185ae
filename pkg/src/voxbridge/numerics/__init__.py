"""Dense float64 tensor math with tape autodiff, Adam, and checkpoints."""

from . import autodiff
from .autodiff import Tape, Var, backward, leaf
from .checkpoint import load_params, save_params
from .gradcheck import GradCheckReport, grad_check
from .optim import AdamState, adam_step
from .rng import make_rng, seed_sequence

__all__ = [
    "autodiff", "Tape", "Var", "leaf", "backward",
    "AdamState", "adam_step", "grad_check", "GradCheckReport",
    "save_params", "load_params", "make_rng", "seed_sequence",
]

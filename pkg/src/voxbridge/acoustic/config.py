"""Capacity variants for the downstream acoustic model."""

from __future__ import annotations

from dataclasses import dataclass

VARIANTS = ("fs2-lite", "ls", "ls-s")


@dataclass
class AcousticConfig:
    variant: str = "fs2-lite"
    hidden: int = 256
    encoder_layers: int = 4
    decoder_layers: int = 4
    variance_hidden: int = 256
    kernel: int = 5
    variance_kernel: int = 3

    def validate(self) -> None:
        if self.hidden < 1 or self.variance_hidden < 1:
            raise ValueError("hidden sizes must be positive")
        if self.encoder_layers < 1 or self.decoder_layers < 1:
            raise ValueError("encoder and decoder need at least one layer each")
        if self.kernel % 2 != 1 or self.variance_kernel % 2 != 1:
            raise ValueError("kernels must be odd")

    @classmethod
    def for_variant(cls, variant: str) -> "AcousticConfig":
        if variant == "fs2-lite":
            return cls(variant=variant, hidden=256, encoder_layers=4,
                       decoder_layers=4, variance_hidden=256)
        if variant == "ls":
            # same trunk, narrower variance predictors
            return cls(variant=variant, hidden=256, encoder_layers=4,
                       decoder_layers=4, variance_hidden=96)
        if variant == "ls-s":
            return cls(variant=variant, hidden=192, encoder_layers=3,
                       decoder_layers=3, variance_hidden=96)
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")

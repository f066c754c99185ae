"""Fully-convolutional acoustic model with explicit variance predictors.

Phoneme embeddings feed a conv encoder at phoneme rate; a duration
predictor (log-frames per phoneme) drives the length regulator; F0 and
energy predictors run at frame rate on the expanded sequence; a conv
decoder emits standardized mel frames. No attention anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dsp import Standardizer
from ..numerics import autodiff as ad
from ..numerics import load_params, make_rng, save_params
from .config import AcousticConfig

MEL_BINS = 80
F0_CHANNELS = 2  # normalized F0 plus voiced flag
DECODER_EXTRA = F0_CHANNELS + 1  # plus energy


def _encode_text(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.float64)


def _decode_text(arr: np.ndarray) -> str:
    return arr.astype(np.uint8).tobytes().decode("utf-8")


def expand_by_durations(values: np.ndarray, durations) -> np.ndarray:
    durations = np.asarray(durations, dtype=np.int64)
    if np.any(durations < 1):
        raise ValueError("durations must be at least 1 frame")
    return np.repeat(values, durations, axis=0)


@dataclass
class AcousticMeta:
    """Identity of the voice the model speaks with."""

    speaker_id: str
    locale: str
    phoneme_count: int
    energy_mean: float
    energy_std: float


class AcousticModel:
    def __init__(self, config: AcousticConfig, meta: AcousticMeta,
                 standardizer: Standardizer, seed: int = 0,
                 params: dict | None = None):
        config.validate()
        if meta.phoneme_count < 1:
            raise ValueError("phoneme inventory is empty")
        self.config = config
        self.meta = meta
        self.standardizer = standardizer
        self.params = self._init_params(seed) if params is None else params

    def _init_params(self, seed: int) -> dict:
        cfg = self.config
        rng = make_rng(seed, "acoustic", "init")
        params = {}

        def conv(name, k, cin, cout):
            std = 1.0 / math.sqrt(k * cin)
            params[f"{name}.w"] = rng.normal(size=(k, cin, cout)) * std
            params[f"{name}.b"] = np.zeros(cout)

        def linear(name, cin, cout):
            std = 1.0 / math.sqrt(cin)
            params[f"{name}.w"] = rng.normal(size=(cin, cout)) * std
            params[f"{name}.b"] = np.zeros(cout)

        params["embed"] = rng.normal(size=(self.meta.phoneme_count, cfg.hidden)) * 0.3
        for i in range(cfg.encoder_layers):
            conv(f"enc.{i}", cfg.kernel, cfg.hidden, cfg.hidden)
        for head, out in (("dur", 1), ("f0", F0_CHANNELS), ("energy", 1)):
            conv(f"{head}.conv0", cfg.variance_kernel, cfg.hidden, cfg.variance_hidden)
            conv(f"{head}.conv1", cfg.variance_kernel, cfg.variance_hidden,
                 cfg.variance_hidden)
            linear(f"{head}.head", cfg.variance_hidden, out)
        conv("dec.0", cfg.kernel, cfg.hidden + DECODER_EXTRA, cfg.hidden)
        for i in range(1, cfg.decoder_layers):
            conv(f"dec.{i}", cfg.kernel, cfg.hidden, cfg.hidden)
        linear("out", cfg.hidden, MEL_BINS)
        return params

    def param_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    # numpy building blocks

    def _conv_np(self, name, x):
        return ad.conv1d_value(x, self.params[f"{name}.w"]) + self.params[f"{name}.b"]

    def _predictor_np(self, head, x):
        h = np.tanh(self._conv_np(f"{head}.conv0", x))
        h = np.tanh(self._conv_np(f"{head}.conv1", h)) + h
        return h @ self.params[f"{head}.head.w"] + self.params[f"{head}.head.b"]

    def _encode_np(self, phonemes: np.ndarray) -> np.ndarray:
        phonemes = np.asarray(phonemes, dtype=np.int64)
        if phonemes.ndim != 1 or phonemes.size == 0:
            raise ValueError("phoneme sequence must be a non-empty 1-D array")
        if np.any(phonemes < 0) or np.any(phonemes >= self.meta.phoneme_count):
            bad = phonemes[(phonemes < 0) | (phonemes >= self.meta.phoneme_count)][0]
            raise ValueError(
                f"unknown phoneme id {bad}; inventory holds "
                f"{self.meta.phoneme_count} entries")
        h = self.params["embed"][phonemes]
        # residual around every equal-width conv keeps gradients alive
        for i in range(self.config.encoder_layers):
            h = np.tanh(self._conv_np(f"enc.{i}", h)) + h
        return h

    def predict_durations(self, phonemes) -> np.ndarray:
        """Per-phoneme frame counts: round(exp(log-duration)), at least 1."""
        encoded = self._encode_np(phonemes)
        log_dur = self._predictor_np("dur", encoded)[:, 0]
        return np.maximum(1, np.round(np.exp(log_dur)).astype(np.int64))

    def _decode_np(self, expanded, f0, energy):
        x = np.tanh(self._conv_np(
            "dec.0", np.concatenate([expanded, f0, energy[:, None]], axis=1)))
        for i in range(1, self.config.decoder_layers):
            x = np.tanh(self._conv_np(f"dec.{i}", x)) + x
        return x @ self.params["out.w"] + self.params["out.b"]

    def synthesize(self, phonemes, durations=None) -> np.ndarray:
        """Mel for a phoneme sequence; frames = sum(durations) when given."""
        encoded = self._encode_np(phonemes)
        if durations is None:
            durations = self.predict_durations(phonemes)
        durations = np.asarray(durations, dtype=np.int64)
        if durations.shape != (encoded.shape[0],):
            raise ValueError("need one duration per phoneme")
        expanded = expand_by_durations(encoded, durations)
        f0 = self._predictor_np("f0", expanded)
        f0 = np.column_stack([f0[:, 0], (f0[:, 1] > 0.5).astype(np.float64)])
        energy = self._predictor_np("energy", expanded)[:, 0]
        mel_std = self._decode_np(expanded, f0, energy)
        return self.standardizer.inverse(np.clip(mel_std, -1.0, 1.0))

    # tape path

    def _conv_tape(self, leaves, name, x):
        return ad.add(ad.conv1d(x, leaves[f"{name}.w"]), leaves[f"{name}.b"])

    def _predictor_tape(self, leaves, head, x):
        h = ad.tanh(self._conv_tape(leaves, f"{head}.conv0", x))
        h = ad.add(ad.tanh(self._conv_tape(leaves, f"{head}.conv1", h)), h)
        return ad.add(ad.matmul(h, leaves[f"{head}.head.w"]), leaves[f"{head}.head.b"])

    def training_outputs(self, tape, leaves, phonemes, durations, f0_matrix,
                         energy):
        """Teacher-forced forward pass; returns (mel, log_dur, f0, energy) Vars."""
        phonemes = np.asarray(phonemes, dtype=np.int64)
        durations = np.asarray(durations, dtype=np.int64)
        onehot = np.zeros((phonemes.size, self.meta.phoneme_count))
        onehot[np.arange(phonemes.size), phonemes] = 1.0
        h = ad.matmul(ad.constant(tape, onehot), leaves["embed"])
        for i in range(self.config.encoder_layers):
            h = ad.add(ad.tanh(self._conv_tape(leaves, f"enc.{i}", h)), h)
        log_dur = self._predictor_tape(leaves, "dur", h)

        frames = int(durations.sum())
        expand = np.zeros((frames, phonemes.size))
        expand[np.arange(frames), np.repeat(np.arange(phonemes.size), durations)] = 1.0
        expanded = ad.matmul(ad.constant(tape, expand), h)

        f0_pred = self._predictor_tape(leaves, "f0", expanded)
        energy_pred = self._predictor_tape(leaves, "energy", expanded)

        dec_in = ad.concat([expanded, ad.constant(tape, f0_matrix),
                            ad.constant(tape, energy[:, None])], axis=1)
        x = ad.tanh(self._conv_tape(leaves, "dec.0", dec_in))
        for i in range(1, self.config.decoder_layers):
            x = ad.add(ad.tanh(self._conv_tape(leaves, f"dec.{i}", x)), x)
        mel = ad.add(ad.matmul(x, leaves["out.w"]), leaves["out.b"])
        return mel, log_dur, f0_pred, energy_pred

    # persistence

    def save(self, path) -> None:
        cfg = self.config
        blob = dict(self.params)
        blob["meta.config"] = np.array([
            cfg.hidden, cfg.encoder_layers, cfg.decoder_layers,
            cfg.variance_hidden, cfg.kernel, cfg.variance_kernel,
            self.meta.phoneme_count], dtype=np.float64)
        blob["meta.variant"] = _encode_text(cfg.variant)
        blob["meta.speaker"] = _encode_text(self.meta.speaker_id)
        blob["meta.locale"] = _encode_text(self.meta.locale)
        blob["meta.energy"] = np.array([self.meta.energy_mean, self.meta.energy_std])
        blob["meta.std.min"] = self.standardizer.minimum
        blob["meta.std.max"] = self.standardizer.maximum
        save_params(path, blob)

    @classmethod
    def load(cls, path) -> "AcousticModel":
        blob = load_params(path)
        nums = blob.pop("meta.config")
        config = AcousticConfig(
            variant=_decode_text(blob.pop("meta.variant")),
            hidden=int(nums[0]), encoder_layers=int(nums[1]),
            decoder_layers=int(nums[2]), variance_hidden=int(nums[3]),
            kernel=int(nums[4]), variance_kernel=int(nums[5]))
        energy = blob.pop("meta.energy")
        meta = AcousticMeta(
            speaker_id=_decode_text(blob.pop("meta.speaker")),
            locale=_decode_text(blob.pop("meta.locale")),
            phoneme_count=int(nums[6]),
            energy_mean=float(energy[0]), energy_std=float(energy[1]))
        standardizer = Standardizer(blob.pop("meta.std.min"), blob.pop("meta.std.max"))
        return cls(config, meta, standardizer, params=blob)


def param_count(config: AcousticConfig, phoneme_count: int = 12) -> int:
    """Trainable-parameter total for a capacity variant."""
    meta = AcousticMeta(speaker_id="probe", locale="probe",
                        phoneme_count=phoneme_count,
                        energy_mean=0.0, energy_std=1.0)
    flat = Standardizer(np.full(MEL_BINS, -1.0), np.full(MEL_BINS, 1.0))
    return AcousticModel(config, meta, flat).param_count()

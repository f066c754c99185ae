"""Conditional normalizing flow over mel frames.

Affine coupling layers with a fixed random channel partition per layer.
Transformed channels are scattered back into their original positions, so a
zero-initialized model is exactly the identity with zero log-determinant.
The prior is a standard normal per frame and channel and is never trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dsp import Standardizer
from ..numerics import autodiff as ad
from ..numerics import load_params, make_rng, save_params
from .conditioning import Conditioning, EXTRA_DIMS, SPEAKER_DIM

LOG_SCALE_LIMIT = 5.0
# softplus(x) - softplus(-x) = x, so this is 5.0 up to float rounding; using
# the same expression the bound uses makes bound(0) collapse to exactly 0
_BOUND_SHIFT = float(np.logaddexp(0.0, LOG_SCALE_LIMIT) -
                     np.logaddexp(0.0, -LOG_SCALE_LIMIT))
HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class FlowConfig:
    channels: int = 80
    layers: int = 8
    hidden: int = 64
    kernel: int = 3
    embed_dim: int = 32

    def validate(self) -> None:
        if self.channels < 2 or self.channels % 2:
            raise ValueError("channels must be even and at least 2")
        if self.layers < 1 or self.hidden < 1:
            raise ValueError("layers and hidden must be positive")
        if self.kernel % 2 != 1:
            raise ValueError("kernel must be odd")


def _softplus_np(x):
    return np.logaddexp(0.0, x)


def _bound_np(e):
    """Squash raw exponents into (-5, 5); exactly 0 at e = 0."""
    return (_softplus_np(e + LOG_SCALE_LIMIT)
            - _softplus_np(e - LOG_SCALE_LIMIT) - _BOUND_SHIFT)


def _bound_tape(e):
    hi = ad.softplus(ad.add(e, np.float64(LOG_SCALE_LIMIT)))
    lo = ad.softplus(ad.add(e, np.float64(-LOG_SCALE_LIMIT)))
    return ad.add(ad.sub(hi, lo), np.float64(-_BOUND_SHIFT))


class FlowModel:
    def __init__(self, config: FlowConfig, accent_count: int, phoneme_slots: int,
                 standardizer: Standardizer, seed: int = 0,
                 params: dict | None = None, partitions: list | None = None):
        config.validate()
        self.config = config
        self.accent_count = int(accent_count)
        self.phoneme_slots = int(phoneme_slots)
        self.standardizer = standardizer
        self.cond_dim = (config.embed_dim + self.accent_count
                         + SPEAKER_DIM + EXTRA_DIMS)
        if partitions is None:
            partitions = [
                make_rng(seed, "flow", "perm", str(k)).permutation(config.channels)
                for k in range(config.layers)
            ]
        self.partitions = [np.asarray(p, dtype=np.int64) for p in partitions]
        self.params = self._init_params(seed) if params is None else params
        half = config.channels // 2
        # 0/1 selection matrices: column gathers and scatters stay exact
        self._select = []
        for perm in self.partitions:
            sa = np.zeros((config.channels, half))
            sb = np.zeros((config.channels, config.channels - half))
            sa[perm[:half], np.arange(half)] = 1.0
            sb[perm[half:], np.arange(config.channels - half)] = 1.0
            self._select.append((sa, sb))

    def _init_params(self, seed: int) -> dict:
        cfg = self.config
        half = cfg.channels // 2
        keep = half
        move = cfg.channels - half
        params = {}
        rng = make_rng(seed, "flow", "init")
        in_dim = keep + self.cond_dim
        for k in range(cfg.layers):
            std = 0.5 / math.sqrt(cfg.kernel * in_dim)
            params[f"flow.k{k}.w1"] = rng.normal(size=(cfg.kernel, in_dim, cfg.hidden)) * std
            params[f"flow.k{k}.b1"] = np.zeros(cfg.hidden)
            params[f"flow.k{k}.w2"] = np.zeros((cfg.kernel, cfg.hidden, 2 * move))
            params[f"flow.k{k}.b2"] = np.zeros(2 * move)
        table_rng = make_rng(seed, "flow", "embed")
        params["embed.phoneme"] = table_rng.normal(
            size=(self.accent_count * self.phoneme_slots, cfg.embed_dim)) * 0.3
        return params

    # conditioning assembly

    def _check(self, x: np.ndarray, cond: Conditioning) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.config.channels:
            raise ValueError(f"expected (frames, {self.config.channels}), got {x.shape}")
        if cond.frames != x.shape[0]:
            raise ValueError(
                f"conditioning has {cond.frames} frames, input has {x.shape[0]}")
        if cond.accent_count != self.accent_count:
            raise ValueError("conditioning accent count does not match model")
        return x

    def _cond_matrix(self, cond: Conditioning) -> np.ndarray:
        emb = self.params["embed.phoneme"][cond.phoneme_rows]
        return np.concatenate([emb, cond.static], axis=1)

    def _net(self, k: int, net_in: np.ndarray) -> np.ndarray:
        h = ad.conv1d_value(net_in, self.params[f"flow.k{k}.w1"]) + self.params[f"flow.k{k}.b1"]
        h = np.tanh(h)
        return ad.conv1d_value(h, self.params[f"flow.k{k}.w2"]) + self.params[f"flow.k{k}.b2"]

    # numpy paths (inference, conversion, evaluation)

    def forward(self, x: np.ndarray, cond: Conditioning) -> tuple[np.ndarray, float]:
        x = self._check(x, cond)
        c = self._cond_matrix(cond)
        half = self.config.channels // 2
        z = x.copy()
        logdet = 0.0
        for k, perm in enumerate(self.partitions):
            keep, move = perm[:half], perm[half:]
            out = self._net(k, np.concatenate([z[:, keep], c], axis=1))
            log_scale = _bound_np(out[:, :move.size])
            shift = out[:, move.size:]
            z[:, move] = z[:, move] * np.exp(log_scale) + shift
            logdet += float(log_scale.sum())
        return z, logdet

    def inverse(self, z: np.ndarray, cond: Conditioning) -> np.ndarray:
        z = self._check(z, cond)
        c = self._cond_matrix(cond)
        half = self.config.channels // 2
        x = z.copy()
        for k in reversed(range(len(self.partitions))):
            perm = self.partitions[k]
            keep, move = perm[:half], perm[half:]
            out = self._net(k, np.concatenate([x[:, keep], c], axis=1))
            log_scale = _bound_np(out[:, :move.size])
            shift = out[:, move.size:]
            x[:, move] = (x[:, move] - shift) * np.exp(-log_scale)
        return x

    def nll(self, x: np.ndarray, cond: Conditioning) -> float:
        z, logdet = self.forward(x, cond)
        if not (np.all(np.isfinite(z)) and np.isfinite(logdet)):
            raise FloatingPointError("non-finite value in flow forward pass")
        dims = z.size
        return float((0.5 * np.sum(z * z) + dims * HALF_LOG_TWO_PI - logdet) / dims)

    def sample(self, cond: Conditioning, rng) -> np.ndarray:
        """Draw mel frames from the prior; output stays in the fitted range."""
        z = rng.normal(size=(cond.frames, self.config.channels))
        y = self.inverse(z, cond)
        return self.standardizer.inverse(np.clip(y, -1.0, 1.0))

    # tape path (training)

    def loss_terms(self, tape, leaves: dict, x: np.ndarray, cond: Conditioning):
        """NLL numerator for one utterance: 0.5 sum z^2 - logdet."""
        x = self._check(x, cond)
        half = self.config.channels // 2
        onehot = np.zeros((cond.frames, self.params["embed.phoneme"].shape[0]))
        onehot[np.arange(cond.frames), cond.phoneme_rows] = 1.0
        emb = ad.matmul(ad.constant(tape, onehot), leaves["embed.phoneme"])
        z = ad.constant(tape, x)
        logdet = None
        for k, perm in enumerate(self.partitions):
            sa, sb = self._select[k]
            xa = ad.matmul(z, sa)
            xb = ad.matmul(z, sb)
            net_in = ad.concat([xa, emb, ad.constant(tape, cond.static)], axis=1)
            h = ad.tanh(ad.add(ad.conv1d(net_in, leaves[f"flow.k{k}.w1"]),
                               leaves[f"flow.k{k}.b1"]))
            out = ad.add(ad.conv1d(h, leaves[f"flow.k{k}.w2"]), leaves[f"flow.k{k}.b2"])
            move = self.config.channels - half
            log_scale = _bound_tape(ad.narrow(out, 1, 0, move))
            shift = ad.narrow(out, 1, move, move)
            yb = ad.add(ad.mul(xb, ad.exp(log_scale)), shift)
            z = ad.add(ad.matmul(xa, sa.T), ad.matmul(yb, sb.T))
            term = ad.total(log_scale)
            logdet = term if logdet is None else ad.add(logdet, term)
        half_sq = ad.scale(ad.total(ad.mul(z, z)), 0.5)
        return ad.sub(half_sq, logdet), x.size

    def batch_loss(self, tape, leaves: dict, batch: list):
        """Mean NLL over a batch of (standardized mel, conditioning) pairs."""
        numerator = None
        total_dims = 0
        for x, cond in batch:
            term, dims = self.loss_terms(tape, leaves, x, cond)
            numerator = term if numerator is None else ad.add(numerator, term)
            total_dims += dims
        loss = ad.scale(numerator, 1.0 / total_dims)
        return ad.add(loss, np.float64(HALF_LOG_TWO_PI))

    # persistence

    def save(self, path) -> None:
        cfg = self.config
        blob = dict(self.params)
        blob["meta.config"] = np.array([
            cfg.channels, cfg.layers, cfg.hidden, cfg.kernel, cfg.embed_dim,
            self.accent_count, self.phoneme_slots], dtype=np.float64)
        for k, perm in enumerate(self.partitions):
            blob[f"meta.perm.{k:03d}"] = perm.astype(np.float64)
        blob["meta.std.min"] = self.standardizer.minimum
        blob["meta.std.max"] = self.standardizer.maximum
        save_params(path, blob)

    @classmethod
    def load(cls, path) -> "FlowModel":
        blob = load_params(path)
        meta = blob.pop("meta.config").astype(np.int64)
        config = FlowConfig(channels=int(meta[0]), layers=int(meta[1]),
                            hidden=int(meta[2]), kernel=int(meta[3]),
                            embed_dim=int(meta[4]))
        accent_count, phoneme_slots = int(meta[5]), int(meta[6])
        standardizer = Standardizer(blob.pop("meta.std.min"), blob.pop("meta.std.max"))
        partitions = [blob.pop(f"meta.perm.{k:03d}").astype(np.int64)
                      for k in range(config.layers)]
        return cls(config, accent_count, phoneme_slots, standardizer,
                   params=blob, partitions=partitions)

"""Likelihood training for the conversion flow."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import CorpusManifest
from ..dsp import fit_standardizer
from ..numerics import AdamState, Tape, adam_step, backward, leaf, make_rng
from .conditioning import Conditioning, conditioning_for
from .model import FlowConfig, FlowModel


@dataclass
class VCTrainConfig:
    steps: int = 200
    batch_utterances: int = 4
    crop_frames: int = 64
    learning_rate: float = 3e-3
    warmup_steps: int = 0
    lr_decay: bool = False
    flow: FlowConfig = field(default_factory=FlowConfig)


@dataclass
class TrainedVC:
    model: FlowModel
    loss_curve: list[float]


def _load_training_set(manifest: CorpusManifest, standardizer):
    items = []
    for utt in manifest.utterances:
        mel = standardizer.transform(manifest.load_mel(utt))
        track = manifest.load_f0(utt)
        profile = manifest.speaker(utt.speaker_id)
        items.append((utt, mel, track, profile))
    return items


def train_vc(manifest: CorpusManifest, config: VCTrainConfig | None = None,
             seed: int = 0) -> TrainedVC:
    """Minimize mean NLL with Adam over random utterance crops."""
    config = config or VCTrainConfig()
    if not manifest.utterances:
        raise ValueError("manifest has no utterances")
    phoneme_slots = max(spec.phoneme_count for spec in manifest.locales.values())
    standardizer = fit_standardizer(
        [manifest.load_mel(u) for u in manifest.utterances])
    model = FlowModel(config.flow, manifest.accent_count, phoneme_slots,
                      standardizer, seed=seed)

    items = _load_training_set(manifest, standardizer)
    conds: dict[str, Conditioning] = {}
    for utt, _, track, profile in items:
        conds[utt.utterance_id] = conditioning_for(
            manifest, utt, track, profile.embedding, phoneme_slots)

    rng = make_rng(seed, "flow", "batches")
    opt = AdamState(lr=config.learning_rate)
    names = sorted(model.params)
    curve = []
    for step in range(config.steps):
        lr = config.learning_rate
        if config.warmup_steps > 0:
            lr *= min(1.0, (step + 1) / config.warmup_steps)
        if config.lr_decay:
            lr *= 0.55 + 0.45 * np.cos(np.pi * step / config.steps)
        opt.lr = lr
        picks = rng.integers(0, len(items), size=config.batch_utterances)
        batch = []
        for i in picks:
            utt, mel, _, _ = items[i]
            frames = mel.shape[0]
            width = min(config.crop_frames, frames)
            start = int(rng.integers(0, frames - width + 1))
            batch.append((mel[start:start + width],
                          conds[utt.utterance_id].crop(start, start + width)))
        tape = Tape()
        leaves = {name: leaf(tape, model.params[name]) for name in names}
        loss = model.batch_loss(tape, leaves, batch)
        curve.append(float(loss.value))
        grads = backward(loss, [leaves[n] for n in names])
        model.params = adam_step(opt, model.params,
                                 {n: g for n, g in zip(names, grads)})
    return TrainedVC(model=model, loss_curve=curve)


def corpus_nll(model: FlowModel, manifest: CorpusManifest,
               max_utterances: int | None = None) -> float:
    """Mean per-dimension NLL over the manifest's utterances."""
    utts = manifest.utterances[:max_utterances]
    if not utts:
        raise ValueError("manifest has no utterances")
    total = 0.0
    dims = 0
    phoneme_slots = model.phoneme_slots
    for utt in utts:
        mel = model.standardizer.transform(manifest.load_mel(utt))
        track = manifest.load_f0(utt)
        profile = manifest.speaker(utt.speaker_id)
        cond = conditioning_for(manifest, utt, track, profile.embedding, phoneme_slots)
        total += model.nll(mel, cond) * mel.size
        dims += mel.size
    return total / dims

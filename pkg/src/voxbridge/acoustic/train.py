"""Training for the downstream acoustic model.

Teacher-forced: ground-truth durations drive the length regulator and the
ground-truth F0 and energy feed the decoder, while the variance predictors
regress onto those same targets. The mel objective is a Charbonnier
approximation of L1 built from smooth primitives; the reported metric is
exact L1 in the standardized domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import CorpusManifest
from ..dsp import fit_standardizer, frame_energy
from ..numerics import AdamState, Tape, adam_step, backward, leaf, make_rng
from ..numerics import autodiff as ad
from .config import AcousticConfig
from .model import AcousticMeta, AcousticModel

CHARBONNIER_EPS = 1e-12


@dataclass
class AcousticTrainConfig:
    steps: int = 300
    batch_utterances: int = 2
    learning_rate: float = 3e-3
    warmup_steps: int = 40
    acoustic: AcousticConfig = field(default_factory=AcousticConfig)


@dataclass
class TrainedAcoustic:
    model: AcousticModel
    loss_curve: list[float]
    mel_l1_curve: list[float]


def _require_single_voice(manifest: CorpusManifest) -> tuple[str, str]:
    first = manifest.utterances[0]
    for utt in manifest.utterances:
        if utt.speaker_id != first.speaker_id:
            raise ValueError(
                f"utterance {utt.utterance_id} has speaker {utt.speaker_id}, "
                f"expected {first.speaker_id}: the downstream model is "
                f"single-speaker")
        if utt.locale != first.locale:
            raise ValueError(
                f"utterance {utt.utterance_id} has locale {utt.locale}, "
                f"expected {first.locale}: the downstream model is monolingual")
    return first.speaker_id, first.locale


def _abs_mean(tape, diff):
    """Charbonnier mean-|x| from smooth primitives."""
    sq = ad.add(ad.mul(diff, diff), np.float64(CHARBONNIER_EPS))
    magnitude = ad.exp(ad.scale(ad.log(sq), 0.5))
    return ad.scale(ad.total(magnitude), 1.0 / diff.value.size)


def _mse(tape, pred, target):
    diff = ad.sub(pred, ad.constant(tape, target))
    return ad.scale(ad.total(ad.mul(diff, diff)), 1.0 / target.size)


@dataclass
class _Example:
    phonemes: np.ndarray
    durations: np.ndarray
    mel_std: np.ndarray
    f0_matrix: np.ndarray      # (frames, 2): normalized F0, voiced flag
    energy: np.ndarray         # (frames,) z-scored
    log_durations: np.ndarray


def _prepare(manifest: CorpusManifest, standardizer, energy_mean, energy_std):
    examples = []
    for utt in manifest.utterances:
        mel = manifest.load_mel(utt)
        track = manifest.load_f0(utt)
        f0_matrix = np.column_stack([track.normalized,
                                     track.voiced.astype(np.float64)])
        energy = (frame_energy(mel) - energy_mean) / energy_std
        examples.append(_Example(
            phonemes=np.asarray(utt.phonemes, dtype=np.int64),
            durations=np.asarray(utt.durations, dtype=np.int64),
            mel_std=standardizer.transform(mel),
            f0_matrix=f0_matrix,
            energy=energy,
            log_durations=np.log(np.asarray(utt.durations, dtype=np.float64)),
        ))
    return examples


def example_loss(model: AcousticModel, tape, leaves, ex: _Example):
    mel, log_dur, f0, energy = model.training_outputs(
        tape, leaves, ex.phonemes, ex.durations, ex.f0_matrix, ex.energy)
    mel_term = _abs_mean(tape, ad.sub(mel, ad.constant(tape, ex.mel_std)))
    dur_term = _mse(tape, log_dur, ex.log_durations[:, None])
    f0_term = _mse(tape, f0, ex.f0_matrix)
    energy_term = _mse(tape, energy, ex.energy[:, None])
    loss = ad.add(ad.add(mel_term, dur_term), ad.add(f0_term, energy_term))
    return loss, mel

def train_acoustic(manifest: CorpusManifest, config: AcousticTrainConfig | None = None,
                   seed: int = 0) -> TrainedAcoustic:
    config = config or AcousticTrainConfig()
    if not manifest.utterances:
        raise ValueError("manifest has no utterances")
    speaker_id, locale = _require_single_voice(manifest)

    mels = [manifest.load_mel(u) for u in manifest.utterances]
    standardizer = fit_standardizer(mels)
    energies = np.concatenate([frame_energy(m) for m in mels])
    energy_mean = float(energies.mean())
    energy_std = float(energies.std()) or 1.0

    meta = AcousticMeta(
        speaker_id=speaker_id, locale=locale,
        phoneme_count=manifest.locales[locale].phoneme_count,
        energy_mean=energy_mean, energy_std=energy_std)
    model = AcousticModel(config.acoustic, meta, standardizer, seed=seed)

    examples = _prepare(manifest, standardizer, energy_mean, energy_std)
    rng = make_rng(seed, "acoustic", "batches")
    opt = AdamState(lr=config.learning_rate)
    names = sorted(model.params)
    curve = []
    l1_curve = []
    for step in range(config.steps):
        # linear warmup, then cosine decay to a tenth of the base rate
        ramp = min(1.0, (step + 1) / config.warmup_steps) if config.warmup_steps else 1.0
        decay = 0.55 + 0.45 * np.cos(np.pi * step / config.steps)
        opt.lr = config.learning_rate * ramp * decay
        picks = rng.integers(0, len(examples), size=config.batch_utterances)
        tape = Tape()
        leaves = {name: leaf(tape, model.params[name]) for name in names}
        total = None
        l1_num = 0.0
        l1_den = 0
        for i in picks:
            loss, mel = example_loss(model, tape, leaves, examples[i])
            total = loss if total is None else ad.add(total, loss)
            l1_num += float(np.abs(mel.value - examples[i].mel_std).sum())
            l1_den += examples[i].mel_std.size
        total = ad.scale(total, 1.0 / len(picks))
        curve.append(float(total.value))
        l1_curve.append(l1_num / l1_den)
        grads = backward(total, [leaves[n] for n in names])
        model.params = adam_step(opt, model.params,
                                 {n: g for n, g in zip(names, grads)})
    return TrainedAcoustic(model=model, loss_curve=curve, mel_l1_curve=l1_curve)


def teacher_forced_l1(model: AcousticModel, manifest: CorpusManifest) -> float:
    """Exact mean |error| of the teacher-forced mel in standardized units."""
    examples = _prepare(manifest, model.standardizer,
                        model.meta.energy_mean, model.meta.energy_std)
    num = 0.0
    den = 0
    names = sorted(model.params)
    for ex in examples:
        tape = Tape()
        leaves = {name: leaf(tape, model.params[name]) for name in names}
        mel, _, _, _ = model.training_outputs(
            tape, leaves, ex.phonemes, ex.durations, ex.f0_matrix, ex.energy)
        num += float(np.abs(mel.value - ex.mel_std).sum())
        den += ex.mel_std.size
    return num / den

"""Identity conversion: re-voice source utterances as the target speaker.

The mel is encoded under the source conditioning and decoded under the
target's, keeping phonemes, durations, and the source accent one-hot while
swapping the speaker embedding and re-scaling F0 to the target's statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import (CorpusManifest, SpeakerProfile, Utterance,
                      save_manifest)
from ..dsp import F0Track, interpolate_and_normalize, write_f0, write_mel
from .conditioning import conditioning_for
from .model import FlowModel


@dataclass
class SyntheticUtterance:
    utterance_id: str
    speaker_id: str
    locale: str
    phonemes: list[int]
    durations: list[int]
    mel: np.ndarray
    track: F0Track


def rescale_f0(track: F0Track, target_mean: float, target_std: float) -> F0Track:
    """Move a contour onto the target speaker's F0 statistics.

    De-normalize with the source's own interpolated-contour statistics,
    re-scale linearly, then re-normalize at the utterance level.
    """
    voiced = track.voiced.astype(bool)
    if track.degenerate or voiced.sum() < 2:
        return F0Track(np.where(voiced, target_mean, 0.0), voiced)
    idx = np.flatnonzero(voiced)
    positions = np.arange(track.frames)
    interp = np.interp(positions, idx, track.f0_hz[idx])
    mu = interp.mean()
    sd = interp.std()
    if sd == 0.0:
        contour = np.full(track.frames, target_mean)
    else:
        contour = target_mean + (interp - mu) * (target_std / sd)
    contour = np.clip(contour, 40.0, 600.0)
    f0 = np.where(voiced, contour, 0.0)
    return interpolate_and_normalize(F0Track(f0, voiced))


def convert(model: FlowModel, manifest: CorpusManifest, utt: Utterance,
            target: SpeakerProfile) -> SyntheticUtterance:
    mel = manifest.load_mel(utt)
    track = manifest.load_f0(utt)
    source = manifest.speaker(utt.speaker_id)

    cond_src = conditioning_for(manifest, utt, track, source.embedding,
                                model.phoneme_slots)
    x = model.standardizer.transform(mel)
    z, _ = model.forward(x, cond_src)

    new_track = rescale_f0(track, target.f0_mean, target.f0_std)
    cond_tgt = conditioning_for(manifest, utt, new_track, target.embedding,
                                model.phoneme_slots)
    y = model.inverse(z, cond_tgt)
    out_mel = model.standardizer.inverse(np.clip(y, -1.0, 1.0))

    return SyntheticUtterance(
        utterance_id=f"{utt.utterance_id}_as_{target.speaker_id}",
        speaker_id=target.speaker_id,
        locale=utt.locale,
        phonemes=list(utt.phonemes),
        durations=list(utt.durations),
        mel=out_mel,
        track=new_track,
    )


def convert_corpus(model: FlowModel, manifest: CorpusManifest,
                   target_speaker_id: str, out_dir,
                   locales: list[str] | None = None) -> Path:
    """Convert every source-speaker utterance and write a synthetic manifest.

    Synthetic utterances carry mels and F0 tracks but no waveform; the wav
    field is left empty.
    """
    target = manifest.speaker(target_speaker_id)
    if locales is None:
        locales = [name for name in manifest.locales if name != target.native_locale]
    for name in locales:
        if name not in manifest.locales:
            raise ValueError(f"unknown locale {name!r}")

    out_dir = Path(out_dir)
    for sub in ("mel", "f0"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    synthetic = []
    for utt in manifest.utterances:
        if utt.locale not in locales:
            continue
        if manifest.speaker(utt.speaker_id).role != "source":
            continue
        conv = convert(model, manifest, utt, target)
        mel_rel = f"mel/{conv.utterance_id}.mel"
        f0_rel = f"f0/{conv.utterance_id}.f0"
        write_mel(out_dir / mel_rel, conv.mel)
        write_f0(out_dir / f0_rel, conv.track)
        synthetic.append(Utterance(
            utterance_id=conv.utterance_id, speaker_id=target.speaker_id,
            locale=conv.locale, phonemes=conv.phonemes, durations=conv.durations,
            wav_path="", mel_path=mel_rel, f0_path=f0_rel))
    if not synthetic:
        raise ValueError(f"no source utterances found for locales {locales}")

    out = CorpusManifest(
        locales={name: manifest.locales[name] for name in manifest.locales},
        speakers={target.speaker_id: target},
        utterances=synthetic, root=out_dir)
    path = out_dir / "manifest.jsonl"
    save_manifest(out, path)
    return path

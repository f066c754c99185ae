"""Corpus domain types and JSON-lines manifest I/O.

A manifest is one header line (locale inventories plus speaker profiles)
followed by one line per utterance. Paths inside the manifest are relative
to the manifest's directory so a corpus tree can be moved wholesale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dsp import F0Track, read_f0, read_mel, read_mel_frames, read_wav

ROLES = ("source", "target", "supporting")


class CorpusIntegrityError(ValueError):
    """A manifest that parses but violates referential integrity."""


@dataclass
class SpeakerProfile:
    speaker_id: str
    native_locale: str
    role: str
    embedding: np.ndarray
    f0_mean: float
    f0_std: float
    formant_shift: float

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float64)
        if self.embedding.shape != (32,):
            raise ValueError(f"embedding must have 32 dims, got {self.embedding.shape}")
        norm = float(np.linalg.norm(self.embedding))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"embedding of {self.speaker_id} not unit norm: {norm}")
        if not 80.0 <= self.f0_mean <= 350.0:
            raise ValueError(f"f0_mean of {self.speaker_id} outside [80, 350]: {self.f0_mean}")
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r} for {self.speaker_id}")

    def to_json(self) -> dict:
        return {
            "speaker_id": self.speaker_id,
            "native_locale": self.native_locale,
            "role": self.role,
            "embedding": [float(v) for v in self.embedding],
            "f0_mean": self.f0_mean,
            "f0_std": self.f0_std,
            "formant_shift": self.formant_shift,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpeakerProfile":
        return cls(
            speaker_id=obj["speaker_id"],
            native_locale=obj["native_locale"],
            role=obj["role"],
            embedding=np.array(obj["embedding"], dtype=np.float64),
            f0_mean=float(obj["f0_mean"]),
            f0_std=float(obj["f0_std"]),
            formant_shift=float(obj["formant_shift"]),
        )


@dataclass
class Utterance:
    utterance_id: str
    speaker_id: str
    locale: str
    phonemes: list[int]
    durations: list[int]
    wav_path: str
    mel_path: str
    f0_path: str

    @property
    def frames(self) -> int:
        return int(sum(self.durations))

    def to_json(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "speaker_id": self.speaker_id,
            "locale": self.locale,
            "phonemes": [int(p) for p in self.phonemes],
            "durations": [int(d) for d in self.durations],
            "wav": self.wav_path,
            "mel": self.mel_path,
            "f0": self.f0_path,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Utterance":
        return cls(
            utterance_id=obj["utterance_id"],
            speaker_id=obj["speaker_id"],
            locale=obj["locale"],
            phonemes=list(obj["phonemes"]),
            durations=list(obj["durations"]),
            wav_path=obj["wav"],
            mel_path=obj["mel"],
            f0_path=obj["f0"],
        )


@dataclass
class LocaleSpec:
    """Phoneme inventory for one locale plus its dense accent index."""

    name: str
    accent_index: int
    phoneme_count: int
    voiced: list[bool]

    def to_json(self) -> dict:
        return {
            "accent_index": self.accent_index,
            "phoneme_count": self.phoneme_count,
            "voiced": [bool(v) for v in self.voiced],
        }


@dataclass
class CorpusManifest:
    locales: dict[str, LocaleSpec]
    speakers: dict[str, SpeakerProfile]
    utterances: list[Utterance]
    root: Path = field(default_factory=Path)

    @property
    def accent_count(self) -> int:
        return len(self.locales)

    def speaker(self, speaker_id: str) -> SpeakerProfile:
        try:
            return self.speakers[speaker_id]
        except KeyError:
            raise CorpusIntegrityError(f"unknown speaker {speaker_id!r}") from None

    def utterances_for(self, speaker_id=None, locale=None) -> list[Utterance]:
        out = self.utterances
        if speaker_id is not None:
            out = [u for u in out if u.speaker_id == speaker_id]
        if locale is not None:
            out = [u for u in out if u.locale == locale]
        return out

    def load_mel(self, utt: Utterance) -> np.ndarray:
        return read_mel(self.root / utt.mel_path)

    def load_f0(self, utt: Utterance) -> F0Track:
        return read_f0(self.root / utt.f0_path)

    def load_wav(self, utt: Utterance) -> np.ndarray:
        return read_wav(self.root / utt.wav_path)


def save_manifest(manifest: CorpusManifest, path) -> None:
    path = Path(path)
    header = {
        "locales": {name: spec.to_json() for name, spec in manifest.locales.items()},
        "speakers": [p.to_json() for p in manifest.speakers.values()],
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(u.to_json(), sort_keys=True) for u in manifest.utterances]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _check_integrity(manifest: CorpusManifest) -> None:
    indices = sorted(s.accent_index for s in manifest.locales.values())
    if indices != list(range(len(indices))):
        raise CorpusIntegrityError(f"accent indices not dense: {indices}")
    for utt in manifest.utterances:
        if utt.speaker_id not in manifest.speakers:
            raise CorpusIntegrityError(
                f"utterance {utt.utterance_id} references absent speaker {utt.speaker_id!r}")
        if utt.locale not in manifest.locales:
            raise CorpusIntegrityError(
                f"utterance {utt.utterance_id} references absent locale {utt.locale!r}")
        spec = manifest.locales[utt.locale]
        if len(utt.phonemes) != len(utt.durations):
            raise CorpusIntegrityError(
                f"utterance {utt.utterance_id}: {len(utt.phonemes)} phonemes "
                f"vs {len(utt.durations)} durations")
        for p in utt.phonemes:
            if not 0 <= p < spec.phoneme_count:
                raise CorpusIntegrityError(
                    f"utterance {utt.utterance_id}: phoneme {p} outside "
                    f"{utt.locale} inventory of {spec.phoneme_count}")
        mel_file = manifest.root / utt.mel_path
        if not mel_file.exists():
            raise CorpusIntegrityError(
                f"utterance {utt.utterance_id}: missing mel file {utt.mel_path}")
        frames = read_mel_frames(mel_file)
        if frames != utt.frames:
            raise CorpusIntegrityError(
                f"utterance {utt.utterance_id}: durations sum to {utt.frames} "
                f"but mel holds {frames} frames")


def load_manifest(path, validate: bool = True) -> CorpusManifest:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CorpusIntegrityError(f"empty manifest {path}")
    header = json.loads(lines[0])
    locales = {
        name: LocaleSpec(name=name, accent_index=spec["accent_index"],
                         phoneme_count=spec["phoneme_count"],
                         voiced=list(spec["voiced"]))
        for name, spec in header["locales"].items()
    }
    speakers = {p["speaker_id"]: SpeakerProfile.from_json(p) for p in header["speakers"]}
    utterances = [Utterance.from_json(json.loads(line)) for line in lines[1:] if line]
    manifest = CorpusManifest(locales=locales, speakers=speakers,
                              utterances=utterances, root=path.parent)
    if validate:
        _check_integrity(manifest)
    return manifest


def apply_external_embeddings(manifest: CorpusManifest, path) -> None:
    """Replace speaker embeddings with vectors from a JSON mapping file."""
    table = json.loads(Path(path).read_text(encoding="utf-8"))
    for speaker_id, vector in table.items():
        profile = manifest.speaker(speaker_id)
        vec = np.asarray(vector, dtype=np.float64)
        norm = np.linalg.norm(vec)
        if vec.shape != (32,) or norm == 0:
            raise ValueError(f"bad external embedding for {speaker_id}")
        profile.embedding = vec / norm

"""Request and response shapes for the listening-test service.

Pydantic handles types and required fields; the semantic invariants a
definition must satisfy (anchor roles, pool arithmetic, file existence)
live in validate_definition so they can return field-level messages.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..evalstats import ASPECTS

MAX_SYSTEMS = 26  # one screen label per letter

Aspect = Literal["naturalness", "speaker_similarity", "accent_similarity"]
Role = Literal["upper_anchor", "lower_anchor", "candidate"]

assert set(Aspect.__args__) == set(ASPECTS)


class SystemSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system_id: str = Field(min_length=1)
    role: Role


class StimulusSet(BaseModel):
    model_config = ConfigDict(extra="forbid")

    utterance_id: str = Field(min_length=1)
    stimuli: dict[str, str]
    reference: str | None = None


class TestDefinition(BaseModel):
    model_config = ConfigDict(extra="forbid")

    test_id: str = Field(min_length=1, max_length=64)
    aspect: Aspect
    systems: list[SystemSpec]
    utterances: list[StimulusSet]
    sample_size: int = Field(default=50, ge=1)
    listener_quota: int = Field(default=60, ge=1)
    seed: int = 0
    show_reference: bool | None = None
    default_slider: float = Field(default=0.0, ge=0.0, le=100.0)

    def resolved_show_reference(self) -> bool:
        if self.show_reference is None:
            return self.aspect == "speaker_similarity"
        return self.show_reference


def validate_definition(definition: TestDefinition) -> dict[str, str]:
    """Field-name to message map; empty when the definition is sound."""
    errors: dict[str, str] = {}
    ids = [s.system_id for s in definition.systems]
    if len(set(ids)) != len(ids):
        errors["systems"] = "duplicate system ids"
    elif len(ids) > MAX_SYSTEMS:
        errors["systems"] = f"at most {MAX_SYSTEMS} systems per screen"
    else:
        for role in ("upper_anchor", "lower_anchor"):
            count = sum(1 for s in definition.systems if s.role == role)
            if count != 1:
                errors["systems"] = f"need exactly one {role}, got {count}"
                break
        else:
            if not any(s.role == "candidate" for s in definition.systems):
                errors["systems"] = "need at least one candidate system"

    utt_ids = [u.utterance_id for u in definition.utterances]
    if not utt_ids:
        errors["utterances"] = "utterance pool is empty"
    elif len(set(utt_ids)) != len(utt_ids):
        errors["utterances"] = "duplicate utterance ids"
    if definition.sample_size > len(definition.utterances):
        errors["sample_size"] = (
            f"sample size {definition.sample_size} exceeds pool of "
            f"{len(definition.utterances)}")

    show_reference = definition.resolved_show_reference()
    if show_reference and definition.aspect != "speaker_similarity":
        errors["show_reference"] = (
            "a labeled reference is only exposed for speaker_similarity tests")

    wanted = set(ids)
    for utt in definition.utterances:
        if "utterances" in errors:
            break
        given = set(utt.stimuli)
        if given != wanted:
            errors["utterances"] = (
                f"utterance {utt.utterance_id!r} must carry exactly one "
                f"stimulus per system")
            break
        if show_reference and not utt.reference:
            errors["utterances"] = (
                f"utterance {utt.utterance_id!r} lacks the reference audio "
                f"this test exposes")
            break
        for path in list(utt.stimuli.values()) + (
                [utt.reference] if utt.reference else []):
            if not Path(path).is_file():
                errors["utterances"] = f"audio file not found: {path}"
                break
        if "utterances" in errors:
            break
    return errors


class LabeledStimulus(BaseModel):
    label: str
    audio_url: str


class Screen(BaseModel):
    utterance_id: str
    stimuli: list[LabeledStimulus]
    reference_url: str | None = None


class AssignmentView(BaseModel):
    """Listener-facing assignment: opaque labels, no system identities."""

    test_id: str
    listener_id: str
    aspect: Aspect
    show_reference: bool
    default_slider: float
    screens: list[Screen]
    progress: int


class ScreenSubmission(BaseModel):
    model_config = ConfigDict(extra="forbid")

    listener_id: str = Field(min_length=1)
    utterance_id: str = Field(min_length=1)
    scores: dict[str, float]

"""Listening-test response records, CSV I/O, screening, and means."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

ASPECTS = ("naturalness", "speaker_similarity", "accent_similarity")
ROLES = ("upper_anchor", "lower_anchor", "candidate")

CSV_COLUMNS = ("listener_id", "utterance_id", "aspect", "system_id",
               "score", "role")


@dataclass(frozen=True)
class Response:
    """One slider rating: a listener scoring one system on one screen."""

    listener_id: str
    utterance_id: str
    aspect: str
    system_id: str
    score: float
    role: str

    def __post_init__(self):
        if self.aspect not in ASPECTS:
            raise ValueError(f"unknown aspect {self.aspect!r}")
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if not 0.0 <= self.score <= 100.0:
            raise ValueError(f"score {self.score} outside [0, 100]")

    @property
    def screen(self) -> tuple:
        # the unit a listener rates all systems of at once
        return (self.listener_id, self.aspect, self.utterance_id)


def load_responses_csv(path) -> list[Response]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"response CSV lacks columns {sorted(missing)}")
        return [Response(listener_id=row["listener_id"],
                         utterance_id=row["utterance_id"],
                         aspect=row["aspect"],
                         system_id=row["system_id"],
                         score=float(row["score"]),
                         role=row["role"])
                for row in reader]


def save_responses_csv(responses: list[Response], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in responses:
            writer.writerow([r.listener_id, r.utterance_id, r.aspect,
                             r.system_id, repr(r.score), r.role])


def system_roles(responses: list[Response]) -> dict[str, str]:
    """Map each system to its (single) role; mixed roles are an error."""
    roles: dict[str, str] = {}
    for r in responses:
        prior = roles.setdefault(r.system_id, r.role)
        if prior != r.role:
            raise ValueError(
                f"system {r.system_id!r} appears as both {prior!r} and "
                f"{r.role!r}")
    return roles


def _screens(responses: list[Response]) -> dict[tuple, list[Response]]:
    screens: dict[tuple, list[Response]] = {}
    for r in responses:
        screens.setdefault(r.screen, []).append(r)
    return screens


def filter_cheaters(responses: list[Response], threshold: int = 5,
                    default_slider: float = 0.0):
    """Drop listeners who left too many screens at extreme or default values.

    A screen counts as flagged when every one of its scores is 0, 100, or
    the slider default. Listeners flagged on strictly more than `threshold`
    screens are removed entirely. Returns (kept, excluded listener ids).
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    inert = {0.0, 100.0, float(default_slider)}
    flagged_count: dict[str, int] = {}
    for key, screen in _screens(responses).items():
        if all(r.score in inert for r in screen):
            flagged_count[key[0]] = flagged_count.get(key[0], 0) + 1
    excluded = {lid for lid, n in flagged_count.items() if n > threshold}
    kept = [r for r in responses if r.listener_id not in excluded]
    return kept, sorted(excluded)


def system_means(responses: list[Response], aspect: str) -> dict[str, float]:
    """Arithmetic mean score per system over all ratings for one aspect."""
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for r in responses:
        if r.aspect != aspect:
            continue
        sums[r.system_id] = sums.get(r.system_id, 0.0) + r.score
        counts[r.system_id] = counts.get(r.system_id, 0) + 1
    if not sums:
        raise ValueError(f"no responses for aspect {aspect!r}")
    return {sid: sums[sid] / counts[sid] for sid in sorted(sums)}


def paired_scores(responses: list[Response], aspect: str,
                  system_a: str, system_b: str) -> list[tuple[float, float]]:
    """Per-screen (a, b) score pairs where both systems were rated."""
    a_scores: dict[tuple, float] = {}
    b_scores: dict[tuple, float] = {}
    for r in responses:
        if r.aspect != aspect:
            continue
        if r.system_id == system_a:
            a_scores[r.screen] = r.score
        elif r.system_id == system_b:
            b_scores[r.screen] = r.score
    keys = sorted(set(a_scores) & set(b_scores))
    return [(a_scores[k], b_scores[k]) for k in keys]

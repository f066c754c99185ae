"""File-backed state with deterministic assignment arithmetic.

Test definitions are single immutable JSON files; listener registrations
and screen submissions are append-only JSONL logs replayed on boot, so a
process restart loses nothing. Assignments themselves are never stored:
they are pure functions of (test seed, listener id) and are rebuilt on
demand.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..numerics import make_rng
from .models import TestDefinition

LABELS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class StoreConflict(Exception):
    """The write collides with something already recorded."""


class QuotaExceeded(Exception):
    """A new listener arrived after the test filled its quota."""


def _content_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:20]


def assigned_utterances(definition: TestDefinition, listener_id: str) -> list[str]:
    """The listener's seeded draw from the pool, in rating order."""
    rng = make_rng(definition.seed, "mushra", "sample", definition.test_id,
                   listener_id)
    pool = [u.utterance_id for u in definition.utterances]
    order = rng.permutation(len(pool))
    return [pool[i] for i in order[:definition.sample_size]]


def screen_labels(definition: TestDefinition, listener_id: str,
                  utterance_id: str) -> dict[str, str]:
    """Opaque label to system id, one fresh bijection per screen."""
    rng = make_rng(definition.seed, "mushra", "labels", definition.test_id,
                   listener_id, utterance_id)
    systems = [s.system_id for s in definition.systems]
    order = rng.permutation(len(systems))
    return {LABELS[i]: systems[j] for i, j in enumerate(order)}


@dataclass
class TestState:
    definition: TestDefinition
    audio: dict[str, str]
    url_by_path: dict[str, str]
    listeners: list[str] = field(default_factory=list)
    responses: dict[tuple[str, str], dict[str, float]] = field(default_factory=dict)

    @property
    def roles(self) -> dict[str, str]:
        return {s.system_id: s.role for s in self.definition.systems}


def _hash_audio(definition: TestDefinition) -> tuple[dict[str, str], dict[str, str]]:
    audio: dict[str, str] = {}
    url_by_path: dict[str, str] = {}
    for utt in definition.utterances:
        paths = list(utt.stimuli.values())
        if utt.reference:
            paths.append(utt.reference)
        for path in paths:
            resolved = str(Path(path).resolve())
            if resolved in url_by_path:
                continue
            key = _content_hash(resolved)
            audio[key] = resolved
            url_by_path[resolved] = key
    return audio, url_by_path


class Store:
    """All tests under one data directory; writes serialized by a lock."""

    def __init__(self, data_dir):
        self.root = Path(data_dir)
        self.tests_dir = self.root / "tests"
        self.tests_dir.mkdir(parents=True, exist_ok=True)
        self.assignments_log = self.root / "assignments.jsonl"
        self.responses_log = self.root / "responses.jsonl"
        self._lock = threading.Lock()
        self.tests: dict[str, TestState] = {}
        self._replay()

    def _replay(self) -> None:
        for path in sorted(self.tests_dir.glob("*.json")):
            raw = json.loads(path.read_text())
            definition = TestDefinition.model_validate(raw["definition"])
            self.tests[definition.test_id] = TestState(
                definition=definition, audio=raw["audio"],
                url_by_path={p: h for h, p in raw["audio"].items()})
        for line in self._log_lines(self.assignments_log):
            state = self.tests[line["test_id"]]
            state.listeners.append(line["listener_id"])
        for line in self._log_lines(self.responses_log):
            state = self.tests[line["test_id"]]
            state.responses[(line["listener_id"], line["utterance_id"])] = (
                line["scores"])

    @staticmethod
    def _log_lines(path: Path):
        if not path.exists():
            return
        with path.open() as handle:
            for line in handle:
                if line.strip():
                    yield json.loads(line)

    @staticmethod
    def _append(path: Path, payload: dict) -> None:
        with path.open("a") as handle:
            handle.write(json.dumps(payload) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def get(self, test_id: str) -> TestState | None:
        return self.tests.get(test_id)

    def create_test(self, definition: TestDefinition) -> TestState:
        with self._lock:
            if definition.test_id in self.tests:
                raise StoreConflict(f"test {definition.test_id!r} already exists")
            audio, url_by_path = _hash_audio(definition)
            path = self.tests_dir / f"{definition.test_id}.json"
            payload = {"definition": definition.model_dump(), "audio": audio}
            path.write_text(json.dumps(payload) + "\n")
            state = TestState(definition=definition, audio=audio,
                              url_by_path=url_by_path)
            self.tests[definition.test_id] = state
            return state

    def ensure_listener(self, test_id: str, listener_id: str) -> None:
        """Register on first sight; quota applies to new listeners only."""
        state = self.tests[test_id]
        with self._lock:
            if listener_id in state.listeners:
                return
            if len(state.listeners) >= state.definition.listener_quota:
                raise QuotaExceeded(
                    f"test {test_id!r} reached its quota of "
                    f"{state.definition.listener_quota} listeners")
            self._append(self.assignments_log,
                         {"test_id": test_id, "listener_id": listener_id})
            state.listeners.append(listener_id)

    def add_response(self, test_id: str, listener_id: str, utterance_id: str,
                     scores_by_system: dict[str, float]) -> None:
        state = self.tests[test_id]
        with self._lock:
            key = (listener_id, utterance_id)
            if key in state.responses:
                raise StoreConflict(
                    f"listener {listener_id!r} already rated {utterance_id!r}")
            self._append(self.responses_log, {
                "test_id": test_id, "listener_id": listener_id,
                "utterance_id": utterance_id, "scores": scores_by_system})
            state.responses[key] = scores_by_system

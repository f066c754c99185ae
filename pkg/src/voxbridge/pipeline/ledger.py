"""Content-addressed stage bookkeeping.

Every stage records digests of what it read and wrote; a later stage (or
a rerun) refuses to build on artifacts whose bytes no longer match the
ledger, which catches stale or hand-edited intermediates that timestamps
would miss.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

STAGE_NAMES = {1: "vc_train", 2: "convert", 3: "acoustic_train", 4: "vocoder_fit"}


class PipelineError(RuntimeError):
    """A stage was asked to run on missing or untrustworthy artifacts."""


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_tree(root) -> str:
    """Digest of a directory: relative names plus contents, sorted."""
    root = Path(root)
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(path.relative_to(root).as_posix().encode())
        digest.update(bytes.fromhex(sha256_file(path)))
    return digest.hexdigest()


def digest_path(path) -> str:
    path = Path(path)
    if not path.exists():
        raise PipelineError(f"missing artifact: {path}")
    return sha256_tree(path) if path.is_dir() else sha256_file(path)


@dataclass
class StageRecord:
    stage: int
    name: str
    status: str
    seed: int | None
    wall_clock: float
    inputs: dict[str, str]
    outputs: dict[str, str]


class StageLedger:
    """JSON-backed map of stage number to its latest record."""

    def __init__(self, path):
        self.path = Path(path)
        self.records: dict[int, StageRecord] = {}

    @classmethod
    def load(cls, path) -> "StageLedger":
        ledger = cls(path)
        if ledger.path.exists():
            raw = json.loads(ledger.path.read_text())
            for entry in raw["records"]:
                ledger.records[int(entry["stage"])] = StageRecord(**entry)
        return ledger

    def save(self) -> None:
        payload = {"records": [asdict(self.records[stage])
                               for stage in sorted(self.records)]}
        self.path.write_text(json.dumps(payload, indent=2) + "\n")

    def record(self, rec: StageRecord) -> None:
        self.records[rec.stage] = rec
        self.save()

    def verify(self, root, rel: str, recorded: str, stage: int) -> None:
        actual = digest_path(Path(root) / rel)
        if actual != recorded:
            raise PipelineError(
                f"stage {stage} ({STAGE_NAMES[stage]}) artifact {rel} does not "
                f"match its ledger hash: stale or modified build")

    def require(self, stage: int, root) -> StageRecord:
        """The stage's record, with every recorded output re-verified."""
        rec = self.records.get(stage)
        if rec is None:
            raise PipelineError(
                f"stage {stage} ({STAGE_NAMES[stage]}) has not run yet")
        for rel, recorded in rec.outputs.items():
            self.verify(root, rel, recorded, stage)
        return rec

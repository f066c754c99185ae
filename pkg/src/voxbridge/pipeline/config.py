"""Run configuration: one dataclass, loadable from TOML or JSON."""

from __future__ import annotations

import json

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..acoustic import AcousticConfig, AcousticTrainConfig
from ..corpus import CorpusConfig
from ..flow_vc import FlowConfig, VCTrainConfig


@dataclass
class PipelineConfig:
    """Everything a full build needs.

    The corpus comes from exactly one place: a corpus config rendered
    under out_dir, or a manifest_path pointing at an existing corpus.
    target_locales are the locales the target speaker's voice is built
    in; each must differ from that speaker's native locale (the build is
    cross-lingual by construction) and they default to every non-native
    locale in the corpus. A single stage-1 conversion model serves any
    number of target locales.
    """

    out_dir: str = "pipeline_out"
    corpus: CorpusConfig | None = field(default_factory=CorpusConfig)
    manifest_path: str | None = None
    target_speaker_id: str | None = None
    target_locales: list[str] | None = None
    # conversion training needs the longer schedule: identity transfer
    # saturates well before 600 steps but accent retention does not
    vc: VCTrainConfig = field(default_factory=lambda: VCTrainConfig(
        steps=600, warmup_steps=40, lr_decay=True))
    acoustic: AcousticTrainConfig = field(default_factory=AcousticTrainConfig)
    vc_seed: int = 0
    acoustic_seed: int = 0

    def validate(self) -> None:
        if not self.out_dir:
            raise ValueError("out_dir must be set")
        if (self.corpus is None) == (self.manifest_path is None):
            raise ValueError("set exactly one of corpus and manifest_path")
        if self.corpus is not None:
            self.corpus.validate()
        self.acoustic.acoustic.validate()
        if self.vc.steps < 1 or self.acoustic.steps < 1:
            raise ValueError("training steps must be positive")
        if self.target_locales is not None and not self.target_locales:
            raise ValueError("target_locales cannot be an empty list")


def _kwargs(cls, raw: dict, context: str, skip: tuple[str, ...] = ()) -> dict:
    allowed = {f.name for f in fields(cls)} - set(skip)
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValueError(f"unknown {context} keys: {', '.join(unknown)}")
    return dict(raw)


def _vc_from_dict(raw: dict) -> VCTrainConfig:
    raw = dict(raw)
    flow = FlowConfig(**_kwargs(FlowConfig, raw.pop("flow", {}), "vc.flow"))
    return VCTrainConfig(flow=flow, **_kwargs(VCTrainConfig, raw, "vc", skip=("flow",)))


def _acoustic_from_dict(raw: dict) -> AcousticTrainConfig:
    raw = dict(raw)
    model_raw = dict(raw.pop("model", {}))
    variant = model_raw.pop("variant", None)
    base = AcousticConfig.for_variant(variant) if variant else AcousticConfig()
    model = replace(base, **_kwargs(AcousticConfig, model_raw, "acoustic.model",
                                    skip=("variant",)))
    return AcousticTrainConfig(
        acoustic=model,
        **_kwargs(AcousticTrainConfig, raw, "acoustic", skip=("acoustic",)))


def config_from_dict(raw: dict) -> PipelineConfig:
    """PipelineConfig from a flat dict with nested stage tables.

    The acoustic model block nests as acoustic.model; a "variant" key
    there picks the preset the remaining keys override.
    """
    raw = dict(raw)
    kwargs = {}
    if "corpus" in raw:
        kwargs["corpus"] = CorpusConfig(
            **_kwargs(CorpusConfig, raw.pop("corpus"), "corpus"))
    elif "manifest_path" in raw:
        kwargs["corpus"] = None
    if "vc" in raw:
        kwargs["vc"] = _vc_from_dict(raw.pop("vc"))
    if "acoustic" in raw:
        kwargs["acoustic"] = _acoustic_from_dict(raw.pop("acoustic"))
    kwargs.update(_kwargs(PipelineConfig, raw, "pipeline",
                          skip=("corpus", "vc", "acoustic")))
    config = PipelineConfig(**kwargs)
    config.validate()
    return config


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if path.suffix == ".toml":
        raw = tomllib.loads(path.read_text())
    elif path.suffix == ".json":
        raw = json.loads(path.read_text())
    else:
        raise ValueError(f"config must be .toml or .json, got {path.name!r}")
    return config_from_dict(raw)

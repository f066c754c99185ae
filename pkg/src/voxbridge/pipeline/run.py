"""The four build stages and the VC-free inference path.

Stage 1 trains the conversion flow on the full corpus. Stage 2 converts
every source-speaker utterance in each target locale into the target
voice, keeping source durations. Stage 3 trains one single-speaker
acoustic model per target locale on the converted corpus alone. Stage 4
fits the waveform-side feature bounds on the target speaker's original
mels only; no synthetic frames and no other speakers, so the fit is
locale-independent by construction. Inference needs stages 3 and 4 and
never loads the stage-1 checkpoint.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from .. import dsp
from ..acoustic import AcousticModel, train_acoustic
from ..corpus import CorpusManifest, generate_corpus, load_manifest
from ..flow_vc import FlowModel, convert_corpus, train_vc
from .config import PipelineConfig
from .ledger import (
    STAGE_NAMES, PipelineError, StageLedger, StageRecord, digest_path,
)

VC_CKPT = "vc.ckpt"
VOCODER = "vocoder.json"
GRIFFIN_LIM_ITERATIONS = 60


def _conv_dir(locale: str) -> str:
    return f"conv_{locale}"


def _tts_ckpt(locale: str) -> str:
    return f"tts_{locale}.ckpt"


def ensure_corpus(config: PipelineConfig) -> CorpusManifest:
    """Load the configured corpus, rendering it under out_dir if needed."""
    if config.manifest_path is not None:
        return load_manifest(config.manifest_path)
    path = Path(config.out_dir) / "corpus" / "manifest.jsonl"
    if path.exists():
        manifest = load_manifest(path)
        if (sorted(manifest.locales) != sorted(config.corpus.locales)
                or len(manifest.speakers) != (len(config.corpus.locales)
                                              * config.corpus.speakers_per_locale)):
            raise PipelineError(
                f"corpus at {path} was built from a different config; "
                f"remove it or point out_dir elsewhere")
        return manifest
    return generate_corpus(config.corpus, path.parent)


def _corpus_ref(config: PipelineConfig, manifest: CorpusManifest) -> tuple[str, str]:
    if config.manifest_path is not None:
        return str(config.manifest_path), digest_path(config.manifest_path)
    rel = "corpus/manifest.jsonl"
    return rel, digest_path(Path(config.out_dir) / rel)


def _resolve_target(config: PipelineConfig,
                    manifest: CorpusManifest) -> tuple[str, list[str]]:
    if config.target_speaker_id is not None:
        speaker = manifest.speaker(config.target_speaker_id)
    else:
        marked = [s for s in manifest.speakers.values() if s.role == "target"]
        if len(marked) != 1:
            raise ValueError(
                f"corpus marks {len(marked)} target speakers; "
                f"set target_speaker_id to pick one")
        speaker = marked[0]
    locales = config.target_locales
    if locales is None:
        locales = [name for name in manifest.locales
                   if name != speaker.native_locale]
    for name in locales:
        if name not in manifest.locales:
            raise ValueError(f"unknown target locale {name!r}")
        if name == speaker.native_locale:
            raise ValueError(
                f"target locale {name!r} is {speaker.speaker_id}'s native "
                f"locale; the build is cross-lingual")
    if not locales:
        raise ValueError("corpus has no locale other than the target speaker's")
    return speaker.speaker_id, list(locales)


def run_stage(stage: int, config: PipelineConfig) -> StageRecord:
    """Run one stage, verifying predecessors and recording digests."""
    if stage not in STAGE_NAMES:
        raise ValueError(f"stage must be 1..4, got {stage}")
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ledger = StageLedger.load(out / "ledger.json")
    manifest = ensure_corpus(config)
    target_id, locales = _resolve_target(config, manifest)
    corpus_key, corpus_digest = _corpus_ref(config, manifest)
    started = time.perf_counter()

    if stage == 1:
        trained = train_vc(manifest, config.vc, seed=config.vc_seed)
        trained.model.save(out / VC_CKPT)
        seed = config.vc_seed
        inputs = {corpus_key: corpus_digest}
        outputs = {VC_CKPT: digest_path(out / VC_CKPT)}
    elif stage == 2:
        rec1 = ledger.require(1, out)
        if rec1.inputs.get(corpus_key) != corpus_digest:
            raise PipelineError(
                "corpus changed since stage 1 trained on it; rerun stage 1")
        model = FlowModel.load(out / VC_CKPT)
        seed = None
        inputs = {VC_CKPT: rec1.outputs[VC_CKPT], corpus_key: corpus_digest}
        outputs = {}
        for locale in locales:
            conv = out / _conv_dir(locale)
            convert_corpus(model, manifest, target_id, conv, locales=[locale])
            outputs[_conv_dir(locale)] = digest_path(conv)
    elif stage == 3:
        rec2 = ledger.require(2, out)
        seed = config.acoustic_seed
        inputs = {}
        outputs = {}
        for locale in locales:
            rel = _conv_dir(locale)
            if rel not in rec2.outputs:
                raise PipelineError(
                    f"stage 2 produced no converted corpus for {locale!r}; "
                    f"rerun stage 2 with this locale listed")
            inputs[rel] = rec2.outputs[rel]
            synthetic = load_manifest(out / rel / "manifest.jsonl")
            trained = train_acoustic(synthetic, config.acoustic,
                                     seed=config.acoustic_seed)
            trained.model.save(out / _tts_ckpt(locale))
            outputs[_tts_ckpt(locale)] = digest_path(out / _tts_ckpt(locale))
    else:
        ledger.require(3, out)
        seed = None
        rows = [u for u in manifest.utterances if u.speaker_id == target_id]
        if not rows:
            raise PipelineError(f"corpus has no utterances for {target_id!r}")
        bounds = dsp.fit_standardizer([manifest.load_mel(u) for u in rows])
        payload = {
            "speaker_id": target_id,
            "minimum": bounds.minimum.tolist(),
            "maximum": bounds.maximum.tolist(),
            "griffin_lim_iterations": GRIFFIN_LIM_ITERATIONS,
        }
        (out / VOCODER).write_text(json.dumps(payload) + "\n")
        # provenance: the fit reads the target speaker's originals, nothing else
        inputs = {u.mel_path: digest_path(Path(manifest.root) / u.mel_path)
                  for u in rows}
        outputs = {VOCODER: digest_path(out / VOCODER)}

    rec = StageRecord(
        stage=stage, name=STAGE_NAMES[stage], status="done", seed=seed,
        wall_clock=time.perf_counter() - started, inputs=inputs, outputs=outputs)
    ledger.record(rec)
    return rec


def run_pipeline(config: PipelineConfig,
                 stages: tuple[int, ...] = (1, 2, 3, 4)) -> list[StageRecord]:
    """Run the given stages in order; a full run also emits sample WAVs."""
    records = [run_stage(stage, config) for stage in stages]
    if 4 in stages:
        manifest = ensure_corpus(config)
        _, locales = _resolve_target(config, manifest)
        samples = Path(config.out_dir) / "samples"
        samples.mkdir(exist_ok=True)
        for locale in locales:
            phonemes = list(range(manifest.locales[locale].phoneme_count))
            dsp.write_wav(samples / f"{locale}.wav", infer(config, phonemes, locale))
    return records


def infer(config: PipelineConfig, phonemes: list[int], locale: str,
          durations: list[int] | None = None) -> np.ndarray:
    """Waveform for a phoneme sequence in one of the built locales.

    Reads the stage-3 voice and stage-4 bounds; the stage-1 conversion
    checkpoint is never opened, so deleting it cannot break inference.
    """
    config.validate()
    out = Path(config.out_dir)
    ledger = StageLedger.load(out / "ledger.json")
    rec3 = ledger.records.get(3)
    if rec3 is None or _tts_ckpt(locale) not in rec3.outputs:
        raise PipelineError(f"no trained voice for locale {locale!r}: run stage 3")
    ledger.verify(out, _tts_ckpt(locale), rec3.outputs[_tts_ckpt(locale)], stage=3)
    rec4 = ledger.records.get(4)
    if rec4 is None:
        raise PipelineError("waveform bounds not fitted: run stage 4")
    ledger.verify(out, VOCODER, rec4.outputs[VOCODER], stage=4)

    model = AcousticModel.load(out / _tts_ckpt(locale))
    if not phonemes:
        raise ValueError("phoneme sequence is empty")
    if min(phonemes) < 0 or max(phonemes) >= model.meta.phoneme_count:
        raise ValueError(
            f"phonemes must be in 0..{model.meta.phoneme_count - 1}")
    raw = json.loads((out / VOCODER).read_text())
    bounds = dsp.Standardizer(np.array(raw["minimum"]), np.array(raw["maximum"]))
    mel = model.synthesize(phonemes, durations)
    # clamp into the target speaker's fitted envelope before inversion
    bounded = bounds.inverse(bounds.transform(mel))
    return dsp.griffin_lim(bounded, iterations=int(raw["griffin_lim_iterations"]))

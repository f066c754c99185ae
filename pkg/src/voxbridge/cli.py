"""Command-line front door: one subcommand per build step.

Every command is a thin wrapper over the library; anything a command can
do is equally available in Python. Paths, seeds, and config files are the
only inputs, so runs are reproducible from the shell history alone.
"""

from __future__ import annotations

import json
from dataclasses import fields, replace
from functools import wraps
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import dsp
from .acoustic import AcousticConfig, AcousticModel, AcousticTrainConfig, train_acoustic
from .corpus import CorpusConfig, CorpusIntegrityError, generate_corpus, load_manifest
from .evalstats import analyze, load_responses_csv, render_report
from .flow_vc import FlowModel, VCTrainConfig, convert_corpus, train_vc
from .pipeline import PipelineError, load_config, run_pipeline, run_stage
from .pipeline import infer as pipeline_infer
from .service import create_app

VARIANT_ALIASES = {"fs2": "fs2-lite"}


def _friendly(fn):
    """Surface expected failures as exit-code-1 messages, not tracebacks."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, PipelineError, CorpusIntegrityError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


def _read_table(path: Path) -> dict:
    if path.suffix == ".toml":
        return tomllib.loads(path.read_text())
    if path.suffix == ".json":
        return json.loads(path.read_text())
    raise click.UsageError(f"config must be .toml or .json, got {path.name!r}")


def _read_ints(path, what: str) -> list[int]:
    tokens = Path(path).read_text().replace(",", " ").split()
    if not tokens:
        raise click.UsageError(f"{what} file {path} is empty")
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise click.UsageError(
            f"{what} file {path} must hold whitespace- or comma-separated "
            "integers") from None


def split_addr(addr: str) -> tuple[str, int]:
    """'host:port' for the service binder."""
    host, sep, port = addr.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise click.UsageError(f"expected host:port, got {addr!r}")
    return host, int(port)


@click.group()
def cli():
    """Cross-lingual voice building: corpus, conversion, voices, listening tests."""


main = cli


@cli.group()
def corpus():
    """Synthetic training corpus."""


@corpus.command("generate")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="TOML/JSON with corpus keys; defaults used when omitted.")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_friendly
def corpus_generate(config_path, seed, out_dir):
    """Generate audio, mels, F0 tracks, and a manifest under --out."""
    raw = _read_table(config_path) if config_path else {}
    allowed = {f.name for f in fields(CorpusConfig)}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise click.UsageError(f"unknown corpus keys: {', '.join(unknown)}")
    config = CorpusConfig(**raw)
    if seed is not None:
        config = replace(config, seed=seed)
    manifest = generate_corpus(config, out_dir)
    click.echo(f"{len(manifest.utterances)} utterances, "
               f"{len(manifest.speakers)} speakers, "
               f"{len(manifest.locales)} locales -> {out_dir}")


@cli.group()
def vc():
    """Flow-based voice conversion."""


@vc.command("train")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--steps", type=int, default=None, help="Optimizer steps.")
@click.option("--warmup-steps", type=int, default=None)
@click.option("--lr-decay/--no-lr-decay", default=None)
@_friendly
def vc_train(manifest_path, out_path, seed, steps, warmup_steps, lr_decay):
    """Fit the conversion flow on a corpus and save a checkpoint."""
    manifest = load_manifest(manifest_path)
    config = VCTrainConfig()
    overrides = {"steps": steps, "warmup_steps": warmup_steps, "lr_decay": lr_decay}
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    result = train_vc(manifest, config, seed=seed)
    result.model.save(out_path)
    click.echo(f"trained {config.steps} steps, "
               f"final nll {result.loss_curve[-1]:.4f} -> {out_path}")


@vc.command("convert")
@click.option("--ckpt", "ckpt_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--target-speaker", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--locale", "locales", multiple=True,
              help="Source locales to convert; default: all non-native.")
@_friendly
def vc_convert(ckpt_path, manifest_path, target_speaker, out_dir, locales):
    """Convert source utterances into the target voice; write a new manifest."""
    model = FlowModel.load(ckpt_path)
    manifest = load_manifest(manifest_path)
    out = convert_corpus(model, manifest, target_speaker, out_dir,
                         locales=list(locales) or None)
    click.echo(f"synthetic manifest -> {out}")


@cli.group()
def tts():
    """Single-voice acoustic models."""


@tts.command("train")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--variant", default="fs2-lite", show_default=True,
              type=click.Choice(["fs2", "fs2-lite", "ls", "ls-s"]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--steps", type=int, default=None, help="Optimizer steps.")
@_friendly
def tts_train(manifest_path, variant, out_path, seed, steps):
    """Train an acoustic model on a single-voice manifest."""
    manifest = load_manifest(manifest_path)
    config = AcousticTrainConfig(
        acoustic=AcousticConfig.for_variant(VARIANT_ALIASES.get(variant, variant)))
    if steps is not None:
        config = replace(config, steps=steps)
    result = train_acoustic(manifest, config, seed=seed)
    result.model.save(out_path)
    click.echo(f"trained {config.steps} steps, "
               f"final mel L1 {result.mel_l1_curve[-1]:.4f} -> {out_path}")


@tts.command("synth")
@click.option("--ckpt", "ckpt_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--phonemes", "phonemes_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out-mel", "out_mel", required=True, type=click.Path(dir_okay=False))
@click.option("--durations", "durations_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Frames per phoneme; predicted when omitted.")
@_friendly
def tts_synth(ckpt_path, phonemes_path, out_mel, durations_path):
    """Synthesize a mel for a phoneme sequence."""
    model = AcousticModel.load(ckpt_path)
    phonemes = _read_ints(phonemes_path, "phoneme")
    durations = _read_ints(durations_path, "duration") if durations_path else None
    mel = model.synthesize(phonemes, durations)
    dsp.write_mel(out_mel, mel)
    click.echo(f"{mel.shape[0]} frames x {mel.shape[1]} bins -> {out_mel}")


@cli.group()
def pipeline():
    """Four-stage distillation: conversion, synthesis, voices, bounds."""


@pipeline.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--stage", type=click.IntRange(1, 4), default=None,
              help="Run one stage; predecessors must already be recorded.")
@_friendly
def pipeline_run(config_path, stage):
    """Run the pipeline (or a single stage) for a config file."""
    config = load_config(config_path)
    records = [run_stage(stage, config)] if stage else run_pipeline(config)
    for record in records:
        outs = ", ".join(sorted(record.outputs))
        click.echo(f"stage {record.stage} {record.name}: {record.status} "
                   f"({record.wall_clock:.1f}s) -> {outs}")


@pipeline.command("infer")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--phonemes", "phonemes_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--locale", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--durations", "durations_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@_friendly
def pipeline_infer_cmd(config_path, phonemes_path, locale, out_path, durations_path):
    """Render a WAV in the distilled voice for one locale."""
    config = load_config(config_path)
    phonemes = _read_ints(phonemes_path, "phoneme")
    durations = _read_ints(durations_path, "duration") if durations_path else None
    wave = pipeline_infer(config, phonemes, locale, durations)
    dsp.write_wav(out_path, wave)
    click.echo(f"{len(wave)} samples -> {out_path}")


@cli.group(name="eval")
def eval_group():
    """Listening-test statistics."""


@eval_group.command("analyze")
@click.option("--responses", "responses_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--default-slider", type=float, default=0.0, show_default=True,
              help="Slider rest position, for screening inattentive listeners.")
@click.option("--baseline", default=None,
              help="System id pairwise tests compare against.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--cheater-threshold", type=int, default=5, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_friendly
def eval_analyze(responses_path, default_slider, baseline, alpha,
                 cheater_threshold, out_dir):
    """Screen listeners, test pairs, and write report.txt / report.json."""
    responses = load_responses_csv(responses_path)
    report = analyze(responses, default_slider=default_slider,
                     baseline=baseline, alpha=alpha,
                     cheater_threshold=cheater_threshold)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = render_report(report)
    (out / "report.txt").write_text(text + "\n")
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    click.echo(text)


@cli.command("serve")
@click.option("--data", "data_dir", required=True, envvar="VOXBRIDGE_DATA",
              type=click.Path(file_okay=False),
              help="Listening-test state directory [env: VOXBRIDGE_DATA].")
@click.option("--addr", default="127.0.0.1:8571", show_default=True,
              envvar="VOXBRIDGE_ADDR",
              help="host:port to bind [env: VOXBRIDGE_ADDR].")
@click.option("--ui", "ui_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Directory with the listener page; served at /.")
def serve(data_dir, addr, ui_dir):
    """Run the listening-test service."""
    import uvicorn

    host, port = split_addr(addr)
    uvicorn.run(create_app(data_dir, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()

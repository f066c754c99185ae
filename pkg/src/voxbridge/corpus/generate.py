"""Parametric speech-like corpus generator.

Each phoneme renders as a harmonic stack (voiced) or a fixed shaped-noise
template (unvoiced) under three multiplicative spectral envelopes: the
phoneme's formant pattern, the locale's accent envelope, and the speaker's
tilt-plus-color gain. All three are deterministic functions of the seed, so
a config renders to byte-identical audio on every run, and the latent
factors behind each speaker are known to the tests that probe them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import dsp
from ..numerics import make_rng
from .signatures import mean_mel
from .types import CorpusManifest, LocaleSpec, SpeakerProfile, Utterance, save_manifest

ENVELOPE_GRID = np.linspace(0.0, 12000.0, 513)
TEMPLATE_SAMPLES = 24000
AMP_VOICED = 0.035
AMP_UNVOICED = 0.045
AMP_FLOOR_NOISE = 2e-4
MAX_HARMONICS = 32
MAX_HARMONIC_HZ = 11500.0

PHONEMES_PER_LOCALE = 12
VOICED_PER_LOCALE = 9
DURATION_MIN = 8
DURATION_MAX = 40


@dataclass
class CorpusConfig:
    locales: list[str] = field(default_factory=lambda: ["alpha", "beta", "gamma"])
    speakers_per_locale: int = 3
    utterances_per_speaker: int = 20
    phonemes_per_utterance: int = 8
    seed: int = 7

    def validate(self) -> None:
        if len(self.locales) < 2:
            raise ValueError("need at least 2 locales")
        if len(set(self.locales)) != len(self.locales):
            raise ValueError("duplicate locale names")
        if self.speakers_per_locale < 2:
            raise ValueError("need at least 2 speakers per locale")
        if self.utterances_per_speaker < 1 or self.phonemes_per_utterance < 2:
            raise ValueError("utterance counts must be positive")


def _mel_position(freqs):
    top = 2595.0 * math.log10(1.0 + 12000.0 / 700.0)
    return 2595.0 * np.log10(1.0 + np.asarray(freqs) / 700.0) / top


class _Locale:
    def __init__(self, seed: int, name: str, accent_index: int):
        self.name = name
        self.accent_index = accent_index
        rng = make_rng(seed, "corpus", "locale", name)
        m = _mel_position(ENVELOPE_GRID)
        # components 4..6 keep the accent envelope out of the subspace the
        # speaker color curves (components 1..3) live in; each locale leans
        # on its own component so accents stay apart regardless of the draw
        d = rng.uniform(-0.2, 0.2, size=3)
        lean = accent_index % 3
        sign = 1.0 if (accent_index // 3) % 2 == 0 else -1.0
        d[lean] = sign * rng.uniform(0.7, 0.95)
        self.accent_gain = np.exp(sum(
            dk * math.sqrt(2.0) * np.cos(np.pi * (k + 4) * m)
            for k, dk in enumerate(d)))
        # each locale raises a different formant band (one-hot, not a
        # ladder) so the three accents are mutually equidistant in mel
        # space and no locale sits between the other two; a shared ladder
        # would make the middle locale an attractor for conversion noise
        f1_lo = 250.0 + (320.0 if lean == 0 else 0.0) + rng.uniform(0.0, 60.0)
        f2_lo = 900.0 + (650.0 if lean == 1 else 0.0) + rng.uniform(0.0, 140.0)
        f3_lo = 2200.0 + (650.0 if lean == 2 else 0.0) + rng.uniform(0.0, 130.0)
        uv_lo = 2800.0 + (0.0, 1100.0, 600.0)[lean] + rng.uniform(0.0, 550.0)
        self.voiced = [i < VOICED_PER_LOCALE for i in range(PHONEMES_PER_LOCALE)]
        self.phoneme_env = []
        for pid in range(PHONEMES_PER_LOCALE):
            prng = make_rng(seed, "corpus", "phoneme", name, str(pid))
            if self.voiced[pid]:
                centers = np.array([prng.uniform(f1_lo, f1_lo + 450),
                                    prng.uniform(f2_lo, f2_lo + 900),
                                    prng.uniform(f3_lo, f3_lo + 700)])
                widths = prng.uniform(90, 170, size=3) * np.array([1.0, 1.3, 1.6])
                gains = np.array([1.0, 0.55, 0.3])
                env = np.full_like(ENVELOPE_GRID, 0.05)
                for c, w, g in zip(centers, widths, gains):
                    env += g * np.exp(-((ENVELOPE_GRID - c) ** 2) / (2 * w * w))
            else:
                center = prng.uniform(uv_lo, uv_lo + 2500)
                width = prng.uniform(1500, 3000)
                env = 0.1 + np.exp(-((ENVELOPE_GRID - center) ** 2) / (2 * width * width))
            self.phoneme_env.append(env)
        self.noise_templates = [
            make_rng(seed, "corpus", "noisetpl", name, str(pid)).normal(size=TEMPLATE_SAMPLES)
            for pid in range(PHONEMES_PER_LOCALE)
        ]
        self.floor_template = make_rng(seed, "corpus", "floor", name).normal(size=TEMPLATE_SAMPLES)

    def spec(self) -> LocaleSpec:
        return LocaleSpec(name=self.name, accent_index=self.accent_index,
                          phoneme_count=PHONEMES_PER_LOCALE, voiced=list(self.voiced))


def _timbre_bases(freqs: np.ndarray) -> np.ndarray:
    """Four unit-RMS log-gain bases: spectral slope plus three color curves.

    All four are normalized to unit RMS over the grid, so no single
    dimension (the raw slope is ~4x a unit cosine) dominates the mel
    signature; identity then survives a collision with another speaker in
    any one dimension. The slope is also projected off the accent
    components, where a strong tilt would read as somebody else's accent.
    """
    m = _mel_position(freqs)
    slope = np.log2(np.maximum(freqs, 50.0) / 1000.0)
    slope = slope / math.sqrt(float(np.mean(slope * slope)))
    for k in range(4, 7):
        basis = math.sqrt(2.0) * np.cos(np.pi * k * m)
        slope = slope - np.mean(slope * basis) * basis
    slope = slope / math.sqrt(float(np.mean(slope * slope)))
    colors = [math.sqrt(2.0) * np.cos(np.pi * (k + 1) * m) for k in range(3)]
    return np.stack([slope, *colors])


def _balanced_timbres(rng, count: int) -> np.ndarray:
    """Per-speaker (tilt, color0..2) rows that sum to zero in every column.

    Each column is a permutation of evenly spaced levels plus a mean-removed
    jitter. Zero column sums keep the locale's average timbre neutral, so
    locale centroids are decided by accent rather than by whichever speaker
    draws happened to land in them; the spacing also guarantees same-locale
    speakers never collide in timbre.
    """
    levels = np.linspace(-1.0, 1.0, count) * 0.9
    # Latin-square assignment: each column is a permutation of the levels
    # (zero sum) and each row cycles through them, so no speaker can draw
    # the near-zero middle level in every dimension and end up generic
    dim_shift = rng.permutation(4)
    speaker_order = rng.permutation(count)
    rows = np.empty((count, 4))
    for dim in range(4):
        jitter = rng.uniform(-0.08, 0.08, size=count)
        jitter -= jitter.mean()
        for i in range(count):
            rows[i, dim] = levels[(speaker_order[i] + dim_shift[dim]) % count] + jitter[i]
    return rows


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


class _TimbrePlanner:
    """Chooses each locale's color rotation by trial classification.

    The color block of a locale's timbre rows spans a plane; rotating that
    plane is a free knob, and a bad draw breaks one of the corpus
    guarantees: a speaker whose timbre mimics another locale's accent gets
    its utterances misclassified, and a source-locale speaker whose timbre
    sits near the conversion target's wins the nearest-centroid vote over
    the target itself for conversions out of that locale (the conversion
    keeps the source accent, so the accent breaks any timbre tie).

    Candidates are scored in two rounds. A cheap envelope model (mean
    phoneme power times squared speaker gain through the mel filterbank,
    with a pitch-comb correction) ranks every rotation by its worst
    classification margin; the finalists are then rendered as short probe
    utterances and re-scored on real mean-mel signatures, which keeps
    model error out of the final pick. Originals are probed both
    directions against every locale planned so far; conversions are
    probed as the target's timbre and pitch under the source locale's
    content, once at full timbre transfer and once per speaker at partial
    transfer, because a real conversion that only moves most of the way
    to the target must still vote target over its source speaker.
    """

    CANDIDATES = 96
    PROBE_FINALISTS = 8
    TRANSFER = 0.6

    def __init__(self, synth: "CorpusSynthesizer"):
        self.synth = synth
        seed = synth.config.seed
        locales = synth.locales
        count = synth.config.speakers_per_locale
        self.fbank = dsp.mel_filterbank()
        self.fft_freqs = np.fft.rfftfreq(dsp.N_FFT, d=1.0 / dsp.SAMPLE_RATE)
        self.bases = _timbre_bases(self.fft_freqs)
        self.voiced_power = {}
        self.unvoiced_power = {}
        for name, loc in locales.items():
            voiced = np.zeros_like(self.fft_freqs)
            unvoiced = np.zeros_like(self.fft_freqs)
            for pid, env in enumerate(loc.phoneme_env):
                amp = np.interp(self.fft_freqs, ENVELOPE_GRID, env * loc.accent_gain)
                if loc.voiced[pid]:
                    voiced += AMP_VOICED ** 2 * amp * amp
                else:
                    unvoiced += AMP_UNVOICED ** 2 * amp * amp
            self.voiced_power[name] = voiced / len(loc.phoneme_env)
            self.unvoiced_power[name] = unvoiced / len(loc.phoneme_env)
        # per-speaker harmonic combs, from the same pitch draws the speaker
        # construction makes; F0 jitter blurs the comb at high harmonics
        self.combs = {}
        for name in locales:
            for idx in range(count):
                rng = make_rng(seed, "corpus", "speaker", name, str(idx))
                f0_mean = rng.uniform(120.0, 280.0)
                f0_std = rng.uniform(8.0, 25.0)
                blur = np.exp(-0.5 * (2.0 * np.pi * self.fft_freqs * f0_std
                                      / f0_mean ** 2) ** 2)
                self.combs[(name, idx)] = (
                    1.0 + np.cos(2.0 * np.pi * self.fft_freqs / f0_mean) * blur)
        self.locale_centroids: list[np.ndarray] = []
        self.prior_speakers: list[tuple[np.ndarray, np.ndarray]] = []
        self.real_centroids: list[np.ndarray] = []
        self.real_speakers: list[tuple[np.ndarray, np.ndarray]] = []
        self.target_row: np.ndarray | None = None
        self.target_comb: np.ndarray | None = None
        self.target_sig: np.ndarray | None = None
        self.target_locale: str | None = None
        self.target_real_sig: np.ndarray | None = None

    def _signature(self, locale: str, row: np.ndarray, comb: np.ndarray) -> np.ndarray:
        power = self.voiced_power[locale] * comb + self.unvoiced_power[locale]
        return self.fbank @ (power * np.exp(2.0 * (row @ self.bases)))

    def _signatures(self, locale: str, rows: np.ndarray) -> list[np.ndarray]:
        return [self._signature(locale, row, self.combs[(locale, idx)])
                for idx, row in enumerate(rows)]

    def _margins(self, locale: str, sigs: list[np.ndarray]) -> list[float]:
        own = np.mean(sigs, axis=0)
        margins = []
        for sig in sigs:
            for prior in self.locale_centroids:
                margins.append(_cosine(sig, own) - _cosine(sig, prior))
        for psig, pown in self.prior_speakers:
            margins.append(_cosine(psig, pown) - _cosine(psig, own))
        margins.extend(self._conv_margins(locale, sigs, own))
        return margins

    def _conv_margins(self, locale: str, sigs: list[np.ndarray],
                      own: np.ndarray) -> list[float]:
        if self.target_row is None:
            return []
        # a conversion keeps the source locale's content but carries the
        # target's gain, and its F0 is rescaled to the target's
        conv = self._signature(locale, self.target_row, self.target_comb)
        margins = []
        for sig in sigs:
            margins.append(_cosine(conv, self.target_sig) - _cosine(conv, sig))
        for psig, _ in self.prior_speakers:
            if psig is not self.target_sig:
                margins.append(_cosine(conv, self.target_sig) - _cosine(conv, psig))
        margins.append(_cosine(conv, own)
                       - max(_cosine(conv, c) for c in self.locale_centroids))
        return margins

    def _probe_sigs(self, locale: str, rows: np.ndarray) -> list[np.ndarray]:
        """Mean log-mel of one rendered probe utterance per candidate row."""
        seed = self.synth.config.seed
        loc = self.synth.locales[locale]
        phonemes = list(range(PHONEMES_PER_LOCALE))
        durations = [10] * len(phonemes)
        sigs = []
        for idx, row in enumerate(rows):
            spk = _Speaker(seed, locale, idx, "probe", row)
            wave = self.synth._render(loc, spk, phonemes, durations,
                                      f"plan-{locale}-{idx}")
            sigs.append(mean_mel(dsp.mel_spectrogram(wave)))
        return sigs

    def _real_margins(self, sigs: list[np.ndarray]) -> list[float]:
        own = np.mean(sigs, axis=0)
        margins = []
        for sig in sigs:
            for prior in self.real_centroids:
                margins.append(_cosine(sig, own) - _cosine(sig, prior))
        for psig, pown in self.real_speakers:
            margins.append(_cosine(psig, pown) - _cosine(psig, own))
        return margins

    def _conv_probe_margins(self, locale: str, rows: np.ndarray,
                            probe_sigs: list[np.ndarray]) -> list[float]:
        if self.target_row is None:
            return []
        seed = self.synth.config.seed
        loc = self.synth.locales[locale]
        phonemes = list(range(PHONEMES_PER_LOCALE))
        durations = [10] * len(phonemes)

        def conv_sig(row: np.ndarray, key: str) -> np.ndarray:
            # the probe speaker is built under the target's name so it
            # carries the target's pitch, which conversion copies exactly
            spk = _Speaker(seed, self.target_locale, 0, "probe", row)
            wave = self.synth._render(loc, spk, phonemes, durations, key)
            return mean_mel(dsp.mel_spectrogram(wave))

        margins = []
        full = conv_sig(self.target_row, f"plan-conv-{locale}")
        for sig in probe_sigs:
            margins.append(_cosine(full, self.target_real_sig) - _cosine(full, sig))
        for psig, _ in self.real_speakers:
            if psig is not self.target_real_sig:
                margins.append(_cosine(full, self.target_real_sig)
                               - _cosine(full, psig))
        margins.append(_cosine(full, np.mean(probe_sigs, axis=0))
                       - max(_cosine(full, c) for c in self.real_centroids))
        for idx, row in enumerate(rows):
            mixed = (1.0 - self.TRANSFER) * row + self.TRANSFER * self.target_row
            h = conv_sig(mixed, f"plan-conv-{locale}-{idx}")
            for sig in probe_sigs:
                margins.append(_cosine(h, self.target_real_sig) - _cosine(h, sig))
        return margins

    def plan(self, rng, locale: str, rows: np.ndarray, is_target: bool) -> np.ndarray:
        scored = []
        for _ in range(self.CANDIDATES):
            q, r = np.linalg.qr(rng.normal(size=(3, 3)))
            q *= np.sign(np.diag(r))
            candidate = rows.copy()
            candidate[:, 1:] = rows[:, 1:] @ q.T
            if is_target:
                # the target sits at index 0 and keeps a neutral slope: an
                # extreme tilt would mask the spectral band some locale
                # keeps its accent in, capping how well conversions into
                # this voice can retain the accent
                flattest = min(range(candidate.shape[0]),
                               key=lambda i: abs(float(candidate[i, 0])))
                candidate[[0, flattest]] = candidate[[flattest, 0]]
            margins = self._margins(locale, self._signatures(locale, candidate))
            scored.append((min(margins) if margins else 0.0, candidate))
        scored.sort(key=lambda item: item[0], reverse=True)
        # the first locale planned has nothing to compare against; every
        # later one re-scores its finalists on rendered probes
        finalists = scored[:self.PROBE_FINALISTS if self.real_centroids else 1]
        best = None
        for _, candidate in finalists:
            probe_sigs = self._probe_sigs(locale, candidate)
            margins = (self._real_margins(probe_sigs)
                       + self._conv_probe_margins(locale, candidate, probe_sigs))
            key = min(margins) if margins else 0.0
            if best is None or key > best[0]:
                best = (key, candidate, probe_sigs)
        _, out, probe_sigs = best
        sigs = self._signatures(locale, out)
        own = np.mean(sigs, axis=0)
        if is_target:
            self.target_row = out[0].copy()
            self.target_comb = self.combs[(locale, 0)]
            self.target_sig = sigs[0]
            self.target_locale = locale
            self.target_real_sig = probe_sigs[0]
        self.locale_centroids.append(own)
        self.prior_speakers.extend((sig, own) for sig in sigs)
        own_real = np.mean(probe_sigs, axis=0)
        self.real_centroids.append(own_real)
        self.real_speakers.extend((sig, own_real) for sig in probe_sigs)
        return out


class _Speaker:
    def __init__(self, seed: int, locale: str, index: int, role: str,
                 timbre: np.ndarray):
        self.speaker_id = f"{locale}_s{index}"
        self.locale = locale
        self.role = role
        rng = make_rng(seed, "corpus", "speaker", locale, str(index))
        self.tilt = float(timbre[0])
        self.color = np.asarray(timbre[1:], dtype=float)
        self.f0_mean = rng.uniform(120.0, 280.0)
        self.f0_std = rng.uniform(8.0, 25.0)
        self.gamma = rng.uniform(0.96, 1.04)
        self.gain = np.exp(timbre @ _timbre_bases(ENVELOPE_GRID))
        latent = np.array([
            self.tilt / 0.9,
            *(self.color / 0.9),
            (self.f0_mean - 200.0) / 80.0,
            (self.f0_std - 16.5) / 8.5,
            (self.gamma - 1.0) / 0.04,
        ])
        # keep the tail moderate: a large random tail hands conversion
        # models a per-speaker fingerprint that lets them memorize each
        # speaker's accent instead of reading it from the accent input,
        # while no tail leaves similar voices too entangled to separate
        tail = rng.normal(size=32 - latent.size) * 0.1
        vec = np.concatenate([latent, tail])
        self.embedding = vec / np.linalg.norm(vec)

    def profile(self) -> SpeakerProfile:
        return SpeakerProfile(
            speaker_id=self.speaker_id, native_locale=self.locale, role=self.role,
            embedding=self.embedding, f0_mean=self.f0_mean, f0_std=self.f0_std,
            formant_shift=self.gamma)


class CorpusSynthesizer:
    """Renders waveforms for (locale, speaker, phoneme sequence) triples."""

    def __init__(self, config: CorpusConfig):
        config.validate()
        self.config = config
        self.locales = {name: _Locale(config.seed, name, i)
                        for i, name in enumerate(config.locales)}
        self.speakers: dict[str, _Speaker] = {}
        self._env_cache: dict[tuple[str, str, int], np.ndarray] = {}
        target_locale = config.locales[0]
        planner = _TimbrePlanner(self)
        for name in config.locales:
            rng = make_rng(config.seed, "corpus", "timbre", name)
            timbres = planner.plan(rng, name,
                                   _balanced_timbres(rng, config.speakers_per_locale),
                                   is_target=name == target_locale)
            for idx in range(config.speakers_per_locale):
                if name == target_locale:
                    role = "target" if idx == 0 else "supporting"
                else:
                    role = "source"
                spk = _Speaker(config.seed, name, idx, role, timbres[idx])
                self.speakers[spk.speaker_id] = spk

    @property
    def target_speaker_id(self) -> str:
        return next(s.speaker_id for s in self.speakers.values() if s.role == "target")

    def _envelope(self, loc: _Locale, spk: _Speaker, phoneme: int) -> np.ndarray:
        # planner probes reuse speaker ids with different candidate gains,
        # so only finalized speakers may touch the cache
        key = (loc.name, spk.speaker_id, phoneme)
        if spk.role != "probe" and key in self._env_cache:
            return self._env_cache[key]
        # formant shift warps the phoneme pattern, not the speaker gain
        shifted = np.interp(ENVELOPE_GRID / spk.gamma, ENVELOPE_GRID,
                            loc.phoneme_env[phoneme])
        env = shifted * loc.accent_gain * spk.gain
        if spk.role != "probe":
            self._env_cache[key] = env
        return env

    def draw_sentence(self, rng) -> list[int]:
        loc_voiced = VOICED_PER_LOCALE
        for _ in range(100):
            seq = rng.integers(0, PHONEMES_PER_LOCALE, size=self.config.phonemes_per_utterance)
            if int(np.sum(seq < loc_voiced)) >= 2:
                return [int(p) for p in seq]
        raise RuntimeError("could not draw a sentence with two voiced phonemes")

    def draw_durations(self, rng, count: int) -> list[int]:
        raw = rng.lognormal(mean=math.log(13.0), sigma=0.3, size=count)
        return [int(np.clip(round(d), DURATION_MIN, DURATION_MAX)) for d in raw]

    def render(self, locale: str, speaker_id: str, phonemes: list[int],
               durations: list[int], contour_key: str) -> np.ndarray:
        """Deterministic waveform for an aligned phoneme sequence.

        contour_key seeds the pitch walk and per-phoneme energies, so equal
        keys give equal prosody even across speakers.
        """
        return self._render(self.locales[locale], self.speakers[speaker_id],
                            phonemes, durations, contour_key)

    def _render(self, loc: _Locale, spk: _Speaker, phonemes: list[int],
                durations: list[int], contour_key: str) -> np.ndarray:
        frames = int(sum(durations))
        n = dsp.synthesis_length(frames)
        rng = make_rng(self.config.seed, "corpus", "contour", contour_key)

        walk = np.empty(frames)
        walk[0] = rng.normal()
        steps = rng.normal(size=frames - 1) if frames > 1 else np.empty(0)
        for t in range(1, frames):
            walk[t] = 0.92 * walk[t - 1] + 0.39 * steps[t - 1]
        f0_frame = spk.f0_mean + spk.f0_std * walk
        lo = max(80.0, spk.f0_mean - 2.5 * spk.f0_std)
        hi = min(360.0, spk.f0_mean + 2.5 * spk.f0_std)
        f0_frame = np.clip(f0_frame, lo, hi)
        centers = np.arange(frames) * dsp.HOP
        f0_sample = np.interp(np.arange(n), centers, f0_frame)
        phase = 2.0 * np.pi * np.cumsum(f0_sample) / dsp.SAMPLE_RATE

        energies = np.clip(rng.lognormal(mean=0.0, sigma=0.22, size=len(phonemes)),
                           0.65, 1.5)

        wave = np.zeros(n)
        bounds = np.concatenate([[0], np.cumsum(durations)])
        for p, (pid, m_p) in enumerate(zip(phonemes, energies)):
            s0 = max(0, bounds[p] * dsp.HOP - dsp.HOP // 2) if p > 0 else 0
            s1 = min(n, bounds[p + 1] * dsp.HOP - dsp.HOP // 2)
            span = slice(s0, s1)
            width = s1 - s0
            env = self._envelope(loc, spk, pid)
            if loc.voiced[pid]:
                f0_span = f0_sample[span]
                h_count = min(MAX_HARMONICS, int(MAX_HARMONIC_HZ / float(f0_span.max())))
                seg = np.zeros(width)
                for h in range(1, h_count + 1):
                    amp = np.interp(h * f0_span, ENVELOPE_GRID, env)
                    seg += amp * np.sin(h * phase[span])
                seg *= AMP_VOICED * m_p
            else:
                reps = -(-width // TEMPLATE_SAMPLES)
                raw = np.tile(loc.noise_templates[pid], reps)[:width]
                spec = np.fft.rfft(raw)
                freqs = np.fft.rfftfreq(width, 1.0 / dsp.SAMPLE_RATE)
                spec *= np.interp(freqs, ENVELOPE_GRID, env)
                seg = np.fft.irfft(spec, n=width)
                rms = np.sqrt(np.mean(seg**2))
                seg *= AMP_UNVOICED * m_p / max(rms, 1e-12)
            fade = min(150, width // 4)
            if fade > 0:
                ramp = np.linspace(0.0, 1.0, fade)
                seg[:fade] *= ramp
                seg[-fade:] *= ramp[::-1]
            wave[span] += seg

        reps = -(-n // TEMPLATE_SAMPLES)
        wave += AMP_FLOOR_NOISE * np.tile(loc.floor_template, reps)[:n]
        peak = float(np.max(np.abs(wave)))
        if peak > 0.98:
            wave *= 0.98 / peak
        return wave


def generate_corpus(config: CorpusConfig, out_dir) -> CorpusManifest:
    """Render the full corpus to out_dir and return its validated manifest."""
    synth = CorpusSynthesizer(config)
    out_dir = Path(out_dir)
    for sub in ("audio", "mel", "f0"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    utterances = []
    for locale in config.locales:
        for spk_idx in range(config.speakers_per_locale):
            speaker_id = f"{locale}_s{spk_idx}"
            for k in range(config.utterances_per_speaker):
                utt_id = f"{speaker_id}_u{k:03d}"
                rng = make_rng(config.seed, "corpus", "sentence", utt_id)
                phonemes = synth.draw_sentence(rng)
                durations = synth.draw_durations(rng, len(phonemes))
                wave = synth.render(locale, speaker_id, phonemes, durations,
                                    contour_key=utt_id)
                mel = dsp.mel_spectrogram(wave)
                track = dsp.interpolate_and_normalize(dsp.estimate_f0(wave))
                wav_rel = f"audio/{utt_id}.wav"
                mel_rel = f"mel/{utt_id}.mel"
                f0_rel = f"f0/{utt_id}.f0"
                dsp.write_wav(out_dir / wav_rel, wave)
                dsp.write_mel(out_dir / mel_rel, mel)
                dsp.write_f0(out_dir / f0_rel, track)
                utterances.append(Utterance(
                    utterance_id=utt_id, speaker_id=speaker_id, locale=locale,
                    phonemes=phonemes, durations=durations,
                    wav_path=wav_rel, mel_path=mel_rel, f0_path=f0_rel))

    manifest = CorpusManifest(
        locales={name: synth.locales[name].spec() for name in config.locales},
        speakers={sid: spk.profile() for sid, spk in synth.speakers.items()},
        utterances=utterances, root=out_dir)
    save_manifest(manifest, out_dir / "manifest.jsonl")
    return manifest

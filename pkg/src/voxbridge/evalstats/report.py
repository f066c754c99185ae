"""Full listening-test analysis and desk-scale objective comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..corpus import CorpusManifest, centroids, classify, cosine, mean_mel
from .ctg import CtgInput, ctg
from .responses import (
    Response,
    filter_cheaters,
    paired_scores,
    system_means,
    system_roles,
)
from .stats import holm_bonferroni, wilcoxon_signed_rank

SIGN_NOTE = ("gap closure is reported with positive = candidate closes the "
             "baseline's gap to the upper anchor")


@dataclass(frozen=True)
class PairTest:
    system_a: str
    system_b: str
    p_value: float
    adjusted: float
    reject: bool
    n_effective: int
    degenerate: bool


@dataclass(frozen=True)
class AspectReport:
    aspect: str
    means: dict[str, float]
    roles: dict[str, str]
    baseline: str | None
    gap_closure: dict[str, float]
    pairwise: list[PairTest]
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class AnalysisReport:
    aspects: list[AspectReport]
    excluded_listeners: list[str]
    default_slider: float
    alpha: float
    note: str = SIGN_NOTE

    def to_dict(self) -> dict:
        return {
            "note": self.note,
            "default_slider": self.default_slider,
            "alpha": self.alpha,
            "excluded_listeners": self.excluded_listeners,
            "aspects": [{
                "aspect": a.aspect,
                "means": a.means,
                "roles": a.roles,
                "baseline": a.baseline,
                "gap_closure": a.gap_closure,
                "notes": a.notes,
                "pairwise": [vars(t).copy() for t in a.pairwise],
            } for a in self.aspects],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _aspect_report(responses: list[Response], aspect: str,
                   baseline: str | None, alpha: float) -> AspectReport:
    rows = [r for r in responses if r.aspect == aspect]
    means = system_means(rows, aspect)
    roles = system_roles(rows)
    notes = []
    candidates = sorted(s for s, role in roles.items() if role == "candidate")
    uppers = [s for s, role in roles.items() if role == "upper_anchor"]
    lowers = [s for s, role in roles.items() if role == "lower_anchor"]

    base = baseline
    if base is None and candidates:
        base = candidates[0]
    if base is not None and base not in candidates:
        raise ValueError(f"baseline {base!r} is not a candidate system")

    gap_closure: dict[str, float] = {}
    if base is not None and len(uppers) == 1 and len(lowers) == 1:
        u, l = means[uppers[0]], means[lowers[0]]
        for cand in candidates:
            if cand == base:
                continue
            inp = CtgInput(s=means[base], v=means[cand], l=l, u=u)
            if inp.outside_anchors:
                notes.append(f"{cand}: mean outside the anchor range")
            gap_closure[cand] = ctg(inp)
    elif base is not None:
        notes.append("gap closure skipped: need exactly one anchor of "
                     "each kind")

    tests = []
    pairs_meta = []
    for i, a in enumerate(candidates):
        for b in candidates[i + 1:]:
            scores = paired_scores(rows, aspect, a, b)
            if not scores:
                continue
            result = wilcoxon_signed_rank(scores)
            pairs_meta.append((a, b, result))
    corrected = holm_bonferroni([r.p_value for _, _, r in pairs_meta],
                                alpha=alpha) if pairs_meta else []
    for (a, b, result), holm in zip(pairs_meta, corrected):
        tests.append(PairTest(system_a=a, system_b=b,
                              p_value=result.p_value,
                              adjusted=holm.adjusted, reject=holm.reject,
                              n_effective=result.n_effective,
                              degenerate=result.degenerate))
    return AspectReport(aspect=aspect, means=means, roles=roles,
                        baseline=base, gap_closure=gap_closure,
                        pairwise=tests, notes=notes)


def analyze(responses: list[Response], default_slider: float = 0.0,
            baseline: str | None = None, alpha: float = 0.05,
            cheater_threshold: int = 5) -> AnalysisReport:
    """Screen listeners, then summarize each aspect present in the data."""
    if not responses:
        raise ValueError("no responses to analyze")
    kept, excluded = filter_cheaters(responses, threshold=cheater_threshold,
                                     default_slider=default_slider)
    if not kept:
        raise ValueError("every listener was excluded by screening")
    aspects = sorted({r.aspect for r in kept})
    reports = [_aspect_report(kept, aspect, baseline, alpha)
               for aspect in aspects]
    return AnalysisReport(aspects=reports, excluded_listeners=excluded,
                          default_slider=default_slider, alpha=alpha)


def render_report(report: AnalysisReport) -> str:
    lines = ["listening test analysis", f"note: {report.note}",
             f"excluded listeners: {report.excluded_listeners or 'none'}"]
    for a in report.aspects:
        lines.append("")
        lines.append(f"[{a.aspect}]")
        for system in sorted(a.means):
            lines.append(f"  {system:<24} {a.means[system]:7.2f}  "
                         f"({a.roles[system]})")
        for cand, value in a.gap_closure.items():
            lines.append(f"  gap closure {cand} vs {a.baseline}: "
                         f"{value:+.1f}%")
        for t in a.pairwise:
            verdict = "significant" if t.reject else "n.s."
            lines.append(f"  {t.system_a} vs {t.system_b}: p={t.p_value:.4g} "
                         f"adjusted={t.adjusted:.4g} ({verdict}, "
                         f"n={t.n_effective})")
        for note in a.notes:
            lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ObjectiveRow:
    utterance_id: str
    nearest_speaker: str
    speaker_cosine: float
    nearest_locale: str


@dataclass(frozen=True)
class ObjectiveReport:
    rows: list[ObjectiveRow]
    speaker_fractions: dict[str, float]
    locale_fractions: dict[str, float]

    def speaker_fraction(self, speaker_id: str) -> float:
        return self.speaker_fractions.get(speaker_id, 0.0)

    def locale_fraction(self, locale: str) -> float:
        return self.locale_fractions.get(locale, 0.0)

    def to_dict(self) -> dict:
        return {
            "speaker_fractions": self.speaker_fractions,
            "locale_fractions": self.locale_fractions,
            "rows": [vars(r).copy() for r in self.rows],
        }


def objective_report(reference: CorpusManifest,
                     candidate: CorpusManifest) -> ObjectiveReport:
    """Nearest-centroid identity check of one corpus against another.

    Speaker and locale centroids come from the reference corpus; every
    candidate utterance is assigned to its nearest of each.
    """
    if not candidate.utterances:
        raise ValueError("candidate manifest holds no utterances")
    speaker_table = centroids(reference, by="speaker")
    locale_table = centroids(reference, by="locale")
    rows = []
    speaker_counts: dict[str, int] = {}
    locale_counts: dict[str, int] = {}
    for utt in candidate.utterances:
        sig = mean_mel(candidate.load_mel(utt))
        speaker = classify(sig, speaker_table)
        locale = classify(sig, locale_table)
        rows.append(ObjectiveRow(
            utterance_id=utt.utterance_id, nearest_speaker=speaker,
            speaker_cosine=cosine(sig, speaker_table[speaker]),
            nearest_locale=locale))
        speaker_counts[speaker] = speaker_counts.get(speaker, 0) + 1
        locale_counts[locale] = locale_counts.get(locale, 0) + 1
    total = len(rows)
    return ObjectiveReport(
        rows=rows,
        speaker_fractions={k: v / total for k, v in sorted(speaker_counts.items())},
        locale_fractions={k: v / total for k, v in sorted(locale_counts.items())})

"""Gap-closure arithmetic on listening-test means.

Sign convention: positive means the candidate system closes part of the
baseline's gap to the upper anchor. With normalized remaining gaps
n_i = 100 * (u - i) / (u - l), the result is (n_s - n_v) / n_s * 100,
which reduces to (v - s) / (u - s) * 100: the fraction of the baseline's
remaining headroom that the candidate recovers.
"""

from __future__ import annotations

from dataclasses import dataclass

ANCHOR_EPS = 1e-9


@dataclass(frozen=True)
class CtgInput:
    s: float   # baseline mean
    v: float   # candidate mean
    l: float   # lower-anchor mean
    u: float   # upper-anchor mean

    def __post_init__(self):
        if not self.u > self.l:
            raise ValueError(
                f"upper anchor {self.u} must exceed lower anchor {self.l}")

    @property
    def outside_anchors(self) -> bool:
        # tolerated, but worth surfacing in reports
        return not (self.l - ANCHOR_EPS <= self.s <= self.u + ANCHOR_EPS
                    and self.l - ANCHOR_EPS <= self.v <= self.u + ANCHOR_EPS)


def ctg(inp: CtgInput) -> float:
    """Percent of the baseline's gap to the upper anchor that is closed."""
    span = inp.u - inp.l
    n_s = 100.0 * (inp.u - inp.s) / span
    n_v = 100.0 * (inp.u - inp.v) / span
    if n_s == 0.0:
        raise ValueError("baseline sits on the upper anchor; gap is zero")
    return (n_s - n_v) / n_s * 100.0


def dctg(ctg_small: float, ctg_big: float) -> float:
    """Percentage-point difference between two gap-closure scores."""
    return float(ctg_small) - float(ctg_big)


@dataclass(frozen=True)
class CtgCheckRow:
    """One previously reported summary line to re-derive from its means."""

    label: str
    s: float
    v: float
    l: float
    u: float
    reported: float


@dataclass(frozen=True)
class CtgCheck:
    label: str
    reported: float
    recomputed: float
    divergence: float
    flagged: bool


def recompute_ctg_table(rows, tolerance: float = 0.2) -> list[CtgCheck]:
    """Re-derive reported gap-closure percentages from their own means.

    Means printed at two decimals cannot pin the ratio down exactly, so
    small divergences are expected; rows further than `tolerance` from the
    reported value are flagged (typically a sign the source averaged
    unrounded data).
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    checks = []
    for row in rows:
        value = ctg(CtgInput(s=row.s, v=row.v, l=row.l, u=row.u))
        divergence = abs(value - row.reported)
        checks.append(CtgCheck(label=row.label, reported=row.reported,
                               recomputed=value, divergence=divergence,
                               flagged=divergence > tolerance))
    return checks

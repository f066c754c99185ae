"""Paired significance testing: Wilcoxon signed-rank and Holm correction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_LIMIT = 12


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float      # W+, sum of ranks of positive differences
    n_effective: int      # pairs left after dropping zero differences
    method: str           # "exact", "normal", or "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    # Ranks are halves at worst (average ranking), so doubling makes every
    # attainable W+ an integer and the distribution a small table.
    doubled = np.round(ranks * 2.0).astype(np.int64)
    counts = np.zeros(int(doubled.sum()) + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:counts.size - r]
        counts += shifted
    total = counts.sum()
    w2 = int(round(w_plus * 2.0))
    lower = counts[:w2 + 1].sum() / total
    upper = counts[w2:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    # average-rank ties shrink the variance
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var -= float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
    if var <= 0.0:
        return 1.0
    delta = w_plus - mean
    # continuity correction pulls the statistic half a step toward the mean
    if delta > 0.5:
        delta -= 0.5
    elif delta < -0.5:
        delta += 0.5
    else:
        delta = 0.0
    z = delta / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon_signed_rank(pairs) -> WilcoxonResult:
    """Two-sided signed-rank test on paired scores.

    Zero differences are dropped. With `n_effective` at most 12 the p-value
    comes from exact enumeration of the signed-rank null (respecting the
    observed tie structure); larger samples use the normal approximation
    with tie and continuity corrections.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    diffs = np.array([float(a) - float(b) for a, b in pairs])
    diffs = diffs[diffs != 0.0]
    if diffs.size == 0:
        return WilcoxonResult(p_value=1.0, statistic=0.0, n_effective=0,
                              method="degenerate")
    ranks = _average_ranks(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    if diffs.size <= EXACT_LIMIT:
        p = _exact_two_sided(ranks, w_plus)
        method = "exact"
    else:
        p = _normal_two_sided(ranks, w_plus)
        method = "normal"
    return WilcoxonResult(p_value=p, statistic=w_plus,
                          n_effective=int(diffs.size), method=method)


@dataclass(frozen=True)
class HolmResult:
    p_value: float
    adjusted: float
    reject: bool


def holm_bonferroni(p_values, alpha: float = 0.05) -> list[HolmResult]:
    """Step-down multiple-comparison correction.

    Sorted ascending, adjusted_(i) = max over j <= i of (m - j) * p_(j)
    with zero-based j, clamped to 1. Rejection walks the sorted sequence
    and stops at the first adjusted value above alpha. Results come back
    in the input order.
    """
    ps = [float(p) for p in p_values]
    if not ps:
        return []
    if any(p < 0.0 or p > 1.0 for p in ps):
        raise ValueError("p-values must lie in [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    reject = [False] * m
    running = 0.0
    alive = True
    for j, idx in enumerate(order):
        running = max(running, (m - j) * ps[idx])
        adjusted[idx] = min(1.0, running)
        if alive and adjusted[idx] <= alpha:
            reject[idx] = True
        else:
            alive = False
    return [HolmResult(p_value=ps[i], adjusted=adjusted[i], reject=reject[i])
            for i in range(m)]

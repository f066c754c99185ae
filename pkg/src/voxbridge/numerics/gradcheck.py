"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad


@dataclass
class GradCheckReport:
    per_param: dict = field(default_factory=dict)  # name -> max relative error

    @property
    def max_relative_error(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0


def _evaluate(build_loss, params: dict) -> float:
    tape = ad.Tape()
    leaves = {name: ad.leaf(tape, value) for name, value in params.items()}
    loss = build_loss(tape, leaves)
    value = float(loss.value)
    if not np.isfinite(value):
        raise FloatingPointError("loss function returned a non-finite value")
    return value


def grad_check(build_loss, params: dict, eps: float = 1e-5) -> GradCheckReport:
    """Compare tape gradients of a scalar loss against central differences.

    `build_loss(tape, leaves)` must return a scalar Var built from the
    given leaves. Relative error per component uses the denominator
    max(|analytic|, |numeric|, 1e-8).
    """
    if not (0.0 < eps <= 1e-2):
        raise ValueError(f"eps must be in (0, 1e-2], got {eps}")

    tape = ad.Tape()
    leaves = {name: ad.leaf(tape, value) for name, value in params.items()}
    loss = build_loss(tape, leaves)
    if loss.value.shape != ():
        raise ValueError("grad_check needs a scalar loss")
    names = list(params)
    analytic = dict(zip(names, ad.backward(loss, [leaves[n] for n in names])))

    report = GradCheckReport()
    for name in names:
        base = np.array(params[name], dtype=np.float64)
        numeric = np.zeros_like(base)
        flat = base.reshape(-1)
        num_flat = numeric.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = _evaluate(build_loss, {**params, name: base})
            flat[i] = orig - eps
            f_minus = _evaluate(build_loss, {**params, name: base})
            flat[i] = orig
            num_flat[i] = (f_plus - f_minus) / (2.0 * eps)
        a = analytic[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), 1e-8)
        report.per_param[name] = float(np.max(np.abs(a - numeric) / denom))
    return report

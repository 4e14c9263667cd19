"""Weighted generalized ψ-estimators: the point of sign change of
``t -> sum_i λ_i ψ(x_i, t)``, closed forms where they exist, and the
finite-support expectation version ``t -> E ψ(ξ, t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from .core import (
    DiscreteDistribution,
    OutcomeKind,
    PsiSolveError,
    SignChangeOutcome,
    WeightedSample,
    validate_weighted_sample,
)
from .leftinv import MonotoneFunction, builtin_monotone, generalized_left_inverse
from .psifamilies import PsiFamily
from .signchange import SolverOptions, find_sign_change

# cap on n * len(ts) per vectorised block
_BLOCK = 1 << 21


class PsiSum:
    """``t -> sum_i λ_i ψ(x_i, t)`` with compensated summation.

    ``evaluate_many`` also returns ``sum_i |λ_i ψ(x_i, t)|`` so the solver can
    judge zeros relative to the size of the terms.
    """

    def __init__(self, family: PsiFamily, sample: WeightedSample):
        family.check_points(sample.x)
        self.family = family
        self.sample = sample
        keep = sample.w > 0
        self._x = sample.x[keep][:, None]
        self._w = sample.w[keep]

    def evaluate_many(self, ts):
        ts = np.asarray(ts, dtype=float).ravel()
        step = max(1, _BLOCK // max(1, self._x.shape[0]))
        vals = np.empty(ts.size)
        mags = np.empty(ts.size)
        for start in range(0, ts.size, step):
            block = ts[start:start + step]
            terms = np.broadcast_to(self.family(self._x, block[None, :]),
                                    (self._x.shape[0], block.size))
            vals[start:start + step], mags[start:start + step] = _kernels.weighted_colsum(terms, self._w)
        return vals, mags

    def __call__(self, t):
        if np.ndim(t) == 0:
            return float(self.evaluate_many([float(t)])[0][0])
        return self.evaluate_many(t)[0]


def weighted_psi_sum(family: PsiFamily, sample: WeightedSample) -> PsiSum:
    return PsiSum(family, sample)


@dataclass(frozen=True)
class EstimateResult:
    outcome: SignChangeOutcome
    closed_form: Optional[float] = None
    agreement: Optional[float] = None
    # a non-Point outcome where the family guarantees a Point
    anomaly: bool = False

    @property
    def kind(self) -> OutcomeKind:
        return self.outcome.kind

    @property
    def location(self) -> Optional[float]:
        return self.outcome.location

    def to_dict(self) -> dict:
        out = self.outcome
        return {
            "kind": out.kind.value,
            "location": out.location,
            "bracket": list(out.bracket) if out.bracket is not None else None,
            "plateau": list(out.plateau) if out.plateau is not None else None,
            "closed_form": self.closed_form,
            "agreement": self.agreement,
        }


def closed_form(family: PsiFamily, sample: WeightedSample) -> Optional[float]:
    """The family's explicit estimator for ``sample``, or ``None`` when none applies."""
    if family.closed_form_fn is None:
        return None
    try:
        value = family.closed_form_fn(sample)
    except (PsiSolveError, ArithmeticError):
        return None
    if value is None or not math.isfinite(value) or value not in family.theta:
        return None
    return float(value)


def guarantees_point(family: PsiFamily) -> bool:
    """Strictly decreasing (up to equivalence) T₁-families always have a point of sign change."""
    return family.has_theta1 and (family.strictly_decreasing_in_t
                                  or family.decreasing_up_to_equivalence)


def _seeds(family: PsiFamily, sample: WeightedSample):
    if not family.has_theta1:
        return None
    seeds = []
    for x in np.unique(sample.x[sample.w > 0]):
        try:
            seeds.append(float(family.theta1_fn(float(x))))
        except (PsiSolveError, ArithmeticError, ValueError):
            continue
    return seeds or None


def estimate(family: PsiFamily, sample: WeightedSample,
             opts: Optional[SolverOptions] = None) -> EstimateResult:
    opts = opts or SolverOptions()
    f = weighted_psi_sum(family, sample)
    outcome = find_sign_change(f, family.theta, opts, seeds=_seeds(family, sample))
    cf = closed_form(family, sample)
    agreement = None
    if outcome.is_point and cf is not None:
        agreement = abs(outcome.location - cf)
    anomaly = not outcome.is_point and guarantees_point(family)
    return EstimateResult(outcome, cf, agreement, anomaly)


def expectation_sign_change(family: PsiFamily, dist: DiscreteDistribution,
                            opts: Optional[SolverOptions] = None) -> SignChangeOutcome:
    """Point of sign change of ``t -> E ψ(ξ, t)`` for a finitely supported ``ξ``."""
    return estimate(family, dist.as_sample(), opts).outcome


def _as_monotone(f) -> MonotoneFunction:
    if isinstance(f, MonotoneFunction):
        return f
    if isinstance(f, str):
        return builtin_monotone(f)
    raise TypeError("f must be a MonotoneFunction or the name of a built-in one")


def bajraktarevic_expectation_point(f: Union[MonotoneFunction, str], p: Optional[Callable],
                                    phi: Optional[Callable], dist: DiscreteDistribution,
                                    opts: Optional[SolverOptions] = None) -> float:
    """``f^(-1)(E[p(ξ) φ(ξ)] / E[p(ξ)])``; defaults are ``p ≡ 1`` and ``φ = f``."""
    f = _as_monotone(f)
    x = np.asarray(dist.atoms, dtype=float)
    prob = np.asarray(dist.probabilities, dtype=float)
    pw = prob * (np.asarray(p(x), dtype=float) if p is not None else 1.0)
    ph = np.asarray((phi if phi is not None else f)(x), dtype=float)
    y = math.fsum(pw * ph) / math.fsum(pw)
    return generalized_left_inverse(f, y, opts)


def validate_and_estimate(family: PsiFamily, points, weights=None,
                          opts: Optional[SolverOptions] = None) -> EstimateResult:
    return estimate(family, validate_weighted_sample(points, weights), opts)

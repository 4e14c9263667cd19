"""Shared domain types: open parameter intervals, weighted samples,
finite-support distributions, sign-change outcomes and the error hierarchy.

Unbounded interval ends are stored as ``None`` rather than IEEE infinities so
that bracket arithmetic never produces ``inf - inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class PsiSolveError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(PsiSolveError, ValueError):
    pass


class LengthMismatch(ValidationError):
    pass


class AllWeightsZero(ValidationError):
    pass


class NegativeWeight(ValidationError):
    pass


class NaNInput(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class DomainError(ValidationError):
    """A data point lies outside the sample space of a family."""


class EmptyInterval(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


@dataclass(frozen=True)
class OpenInterval:
    """Nondegenerate open interval ``(lower, upper)``; ``None`` marks an unbounded side."""

    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        for end in (self.lower, self.upper):
            if end is not None and not math.isfinite(end):
                raise InvalidParameter(
                    f"interval endpoints must be finite or None, got {end!r}")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise EmptyInterval(f"degenerate interval ({self.lower}, {self.upper})")

    @classmethod
    def real_line(cls) -> "OpenInterval":
        return cls(None, None)

    @classmethod
    def positive(cls) -> "OpenInterval":
        return cls(0.0, None)

    @property
    def bounded_below(self) -> bool:
        return self.lower is not None

    @property
    def bounded_above(self) -> bool:
        return self.upper is not None

    def __contains__(self, t) -> bool:
        t = float(t)
        if math.isnan(t):
            return False
        if self.lower is not None and not t > self.lower:
            return False
        if self.upper is not None and not t < self.upper:
            return False
        return math.isfinite(t)

    def contains_many(self, ts) -> np.ndarray:
        """Elementwise membership mask."""
        ts = np.asarray(ts, dtype=float)
        ok = np.isfinite(ts)
        if self.lower is not None:
            ok &= ts > self.lower
        if self.upper is not None:
            ok &= ts < self.upper
        return ok

    def contains_all(self, ts) -> bool:
        return bool(np.all(self.contains_many(ts)))

    def center(self) -> float:
        """A representative interior point."""
        if self.lower is not None and self.upper is not None:
            return 0.5 * (self.lower + self.upper)
        if self.lower is not None:
            return self.lower + max(1.0, abs(self.lower))
        if self.upper is not None:
            return self.upper - max(1.0, abs(self.upper))
        return 0.0

    def grid(self, count: int, scale: float = 1.0) -> np.ndarray:
        """``count`` strictly increasing interior points.

        Bounded intervals get an equispaced grid; unbounded sides are reached
        through a tangent (two-sided) or ``u/(1-u)`` (one-sided) stretch.
        """
        u = np.arange(1, count + 1, dtype=float) / (count + 1)
        lo, hi = self.lower, self.upper
        if lo is not None and hi is not None:
            pts = lo + (hi - lo) * u
        elif lo is not None:
            pts = lo + scale * u / (1.0 - u)
        elif hi is not None:
            pts = hi - scale * (1.0 - u) / u
        else:
            pts = scale * np.tan(np.pi * (u - 0.5))
        pts = np.unique(pts)
        return pts[self.contains_many(pts)]

    def clip_inside(self, t: float) -> float:
        """Move ``t`` to the nearest representable interior point if it sits on or past an end."""
        if self.lower is not None and t <= self.lower:
            t = np.nextafter(self.lower, np.inf)
        if self.upper is not None and t >= self.upper:
            t = np.nextafter(self.upper, -np.inf)
        return float(t)

    def as_floats(self) -> tuple[float, float]:
        return (-math.inf if self.lower is None else self.lower,
                math.inf if self.upper is None else self.upper)

    def __str__(self) -> str:
        lo = "-inf" if self.lower is None else repr(self.lower)
        hi = "+inf" if self.upper is None else repr(self.upper)
        return f"({lo}, {hi})"


@dataclass(frozen=True)
class WeightedSample:
    """Observations paired with nonnegative weights, not all zero."""

    points: tuple
    weights: tuple

    def __post_init__(self):
        pts = [float(p) for p in np.ravel(np.asarray(self.points, dtype=float))]
        wts = [float(w) for w in np.ravel(np.asarray(self.weights, dtype=float))]
        if len(pts) != len(wts):
            raise LengthMismatch(f"{len(pts)} points but {len(wts)} weights")
        if not pts:
            raise LengthMismatch("a sample needs at least one point")
        if any(math.isnan(v) for v in pts + wts):
            raise NaNInput("sample contains NaN")
        if any(math.isinf(v) for v in pts + wts):
            raise NaNInput("sample contains an infinite value")
        if any(w < 0 for w in wts):
            raise NegativeWeight("weights must be nonnegative")
        if not any(w > 0 for w in wts):
            raise AllWeightsZero("at least one weight must be positive")
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "weights", tuple(wts))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def has_equal_weights(self) -> bool:
        w = self.weights
        return all(wi == w[0] for wi in w)

    def scaled(self, c: float) -> "WeightedSample":
        return validate_weighted_sample(self.points, [c * wi for wi in self.weights])

    def permuted(self, order: Sequence[int]) -> "WeightedSample":
        return validate_weighted_sample([self.points[i] for i in order],
                                        [self.weights[i] for i in order])


def validate_weighted_sample(points, weights=None) -> WeightedSample:
    """Check and freeze a weighted sample. Weights default to all ones."""
    if weights is None:
        weights = np.ones(np.size(points))
    return WeightedSample(points, weights)


PROBABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    atoms: tuple
    probabilities: tuple

    def __post_init__(self):
        atoms = tuple(float(a) for a in self.atoms)
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probabilities", probs)
        if len(atoms) != len(probs):
            raise LengthMismatch(f"{len(atoms)} atoms but {len(probs)} probabilities")
        if not atoms:
            raise InvalidDistribution("a distribution needs at least one atom")
        if any(math.isnan(v) or math.isinf(v) for v in atoms + probs):
            raise NaNInput("distribution contains NaN or infinite entries")
        if any(p < 0 for p in probs):
            raise InvalidDistribution("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidDistribution(
                f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if len(set(atoms)) != len(atoms):
            raise InvalidDistribution("atoms must be distinct")

    def as_sample(self) -> WeightedSample:
        return validate_weighted_sample(self.atoms, self.probabilities)


class OutcomeKind(str, Enum):
    POINT = "Point"
    ZERO_PLATEAU = "ZeroPlateau"
    NO_FLIP = "NoFlip"
    NOT_DECREASING_TYPE = "NotDecreasingType"


@dataclass(frozen=True)
class SignChangeOutcome:
    kind: OutcomeKind
    location: Optional[float] = None
    bracket: Optional[tuple] = None
    plateau: Optional[tuple] = None
    witnesses: tuple = ()
    message: str = ""
    evaluations: int = field(default=0, compare=False)

    @property
    def is_point(self) -> bool:
        return self.kind is OutcomeKind.POINT

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "location": self.location,
            "bracket": list(self.bracket) if self.bracket is not None else None,
            "plateau": list(self.plateau) if self.plateau is not None else None,
            "witnesses": [list(w) if isinstance(w, tuple) else w for w in self.witnesses],
            "message": self.message,
        }

"""Generalized left inverse ``g(y) = sup{u : f(u) <= y}`` of a strictly increasing,
possibly discontinuous function, defined on the convex hull of its range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .core import InvalidParameter, OpenInterval, PsiSolveError
from .signchange import SolverOptions

_SECTIONS = 64
_CHECK_POINTS = 256


class OutOfHull(PsiSolveError, ValueError):
    pass


class NotIncreasing(PsiSolveError, ValueError):
    pass


def _apply(fn, ts):
    ts = np.asarray(ts, dtype=float)
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = np.asarray(fn(ts), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != ts.shape:
        out = np.array([float(fn(float(t))) for t in ts.ravel()]).reshape(ts.shape)
    return out


@dataclass(frozen=True, eq=False)
class MonotoneFunction:
    """A strictly increasing map on an open interval.

    ``evaluate`` should accept numpy arrays. ``inverse`` (the generalized left
    inverse, if known in closed form) and ``hull`` (the open convex hull of the
    range) skip the numerical routes.
    """

    evaluate: Callable
    domain: OpenInterval = field(default_factory=OpenInterval)
    inverse: Optional[Callable] = None
    hull: Optional[OpenInterval] = None
    name: str = "f"
    continuous: bool = True

    def __post_init__(self):
        grid = self.domain.grid(_CHECK_POINTS)
        vals = _apply(self.evaluate, grid)
        finite = np.isfinite(vals)
        u, v, _ = _kernels.increase_scan(vals[finite], 0.0, True, 0.0)
        if u >= 0:
            g = grid[finite]
            raise NotIncreasing(
                f"{self.name} is not strictly increasing: f({g[u]!r}) >= f({g[v]!r})")
        object.__setattr__(self, "_hull", self.hull)

    def __call__(self, t):
        out = _apply(self.evaluate, t)
        return float(out) if out.ndim == 0 else out

    def range_hull(self, opts: Optional[SolverOptions] = None) -> OpenInterval:
        if self._hull is None:
            object.__setattr__(self, "_hull", _estimate_hull(self))
        return self._hull


def _limit(f, ts) -> Optional[float]:
    """Limit of ``f`` along ``ts`` (monotone in ``t``), or ``None`` if infinite.

    The limit is finite once the float values stop moving, or when the
    sequence runs out (a bounded end reached to machine precision) with a last
    step below ``1e-12`` relative. ``log`` near 0 keeps stepping by ``ln 2``
    and so is infinite.
    """
    prev = None
    step = math.inf
    delta = 0.0
    calm = 0
    for t in ts:
        v = float(f(t))
        if not math.isfinite(v):
            return None
        if v == prev:
            calm += 1
            if calm >= 3:
                return v
        else:
            calm = 0
        if prev is not None:
            delta = v - prev
            step = abs(delta)
        prev = v
    if prev is not None and step <= 1e-12 * max(1.0, abs(prev)):
        # halving steps toward a smooth end leave a remainder about equal to the last step
        return prev + delta
    return None


def _toward_upper(domain: OpenInterval):
    c = domain.center()
    if domain.upper is None:
        for k in range(1024):
            t = c + 2.0 ** k
            if not math.isfinite(t):
                return
            yield t
    else:
        gap = domain.upper - c
        for k in range(1024):
            t = domain.upper - gap * 2.0 ** -k
            if not t < domain.upper:
                return
            yield t


def _toward_lower(domain: OpenInterval):
    c = domain.center()
    if domain.lower is None:
        for k in range(1024):
            t = c - 2.0 ** k
            if not math.isfinite(t):
                return
            yield t
    else:
        gap = c - domain.lower
        for k in range(1024):
            t = domain.lower + gap * 2.0 ** -k
            if not t > domain.lower:
                return
            yield t


def _estimate_hull(f: MonotoneFunction) -> OpenInterval:
    hi = _limit(f, _toward_upper(f.domain))
    lo = _limit(f, _toward_lower(f.domain))
    return OpenInterval(lo, hi)


def range_hull(f: MonotoneFunction, opts: Optional[SolverOptions] = None) -> OpenInterval:
    """Convex hull of ``f(domain)``, open at both ends; ``None`` ends are infinite."""
    return f.range_hull(opts)


def generalized_left_inverse(f: MonotoneFunction, y: float,
                             opts: Optional[SolverOptions] = None) -> float:
    """``sup{u in domain : f(u) <= y}`` for ``y`` strictly inside the range hull."""
    opts = opts or SolverOptions()
    y = float(y)
    hull = f.range_hull(opts)
    if y not in hull:
        raise OutOfHull(f"{y!r} lies outside the range hull {hull} of {f.name}")
    if f.inverse is not None:
        return float(f.inverse(y))
    lo, hi = _inverse_bracket(f, y, opts)
    tol = opts.tolerance
    while hi - lo > tol:
        pts = np.linspace(lo, hi, _SECTIONS + 2)[1:-1]
        pts = pts[(pts > lo) & (pts < hi)]
        if pts.size == 0:
            break
        below = _apply(f.evaluate, pts) <= y
        k = int(np.count_nonzero(below))
        # below is a prefix for an increasing f
        if k:
            lo = float(pts[k - 1])
        if k < pts.size:
            hi = float(pts[k])
    if f(lo) == y:
        return lo
    return 0.5 * (lo + hi)


def _inverse_bracket(f: MonotoneFunction, y: float, opts: SolverOptions):
    """Points ``lo < hi`` with ``f(lo) <= y < f(hi)``."""
    c = f.domain.center()
    fc = f(c)
    step = opts.initial_step
    if fc <= y:
        lo = c
        for t in _walk(f.domain, c, +1, step, opts.max_expansions):
            if f(t) > y:
                return lo, t
            lo = t
    else:
        hi = c
        for t in _walk(f.domain, c, -1, step, opts.max_expansions):
            if f(t) <= y:
                return t, hi
            hi = t
    raise OutOfHull(f"could not bracket f(u) = {y!r} for {f.name}")


def _walk(domain: OpenInterval, start: float, direction: int, step: float, count: int):
    t = start
    for k in range(count):
        if direction > 0:
            t = domain.upper - 0.5 * (domain.upper - t) if domain.bounded_above else t + step * 2.0 ** k
        else:
            t = domain.lower + 0.5 * (t - domain.lower) if domain.bounded_below else t - step * 2.0 ** k
        if t not in domain:
            return
        yield t


# ---------------------------------------------------------------------------
# built-in strictly increasing functions

_SQRT2 = math.sqrt(2.0)


def _jump(t):
    t = np.asarray(t, dtype=float)
    return np.where(t < 0.0, t, t + 1.0)


def _jump_inverse(y):
    if y < 0.0:
        return y
    if y < 1.0:
        return 0.0
    return y - 1.0


def _l1l2(t):
    t = np.asarray(t, dtype=float)
    return t / np.hypot(1.0, t / _SQRT2)


def _l1l2_inverse(y):
    return y / math.sqrt(1.0 - 0.5 * y * y)


def builtin_monotone(name: str, analytic: bool = True) -> MonotoneFunction:
    """Catalogue of increasing functions: ``id``, ``cube``, ``exp``, ``log``, ``jump``, ``l1l2``.

    With ``analytic=False`` the closed-form inverse and hull are dropped so the
    numerical routes are exercised.
    """
    R = OpenInterval()
    table = {
        "id": (lambda t: np.asarray(t, dtype=float), R, lambda y: y, R, True),
        "cube": (lambda t: np.asarray(t, dtype=float) ** 3, R, np.cbrt, R, True),
        "exp": (np.exp, R, math.log, OpenInterval(0.0, None), True),
        "log": (np.log, OpenInterval(0.0, None), math.exp, R, True),
        "jump": (_jump, R, _jump_inverse, R, False),
        "l1l2": (_l1l2, R, _l1l2_inverse, OpenInterval(-_SQRT2, _SQRT2), True),
    }
    if name not in table:
        raise InvalidParameter(
            f"unknown monotone function {name!r}; choose from {', '.join(sorted(table))}")
    fn, dom, inv, hull, cont = table[name]
    if not analytic:
        inv, hull = None, None
    return MonotoneFunction(fn, dom, inverse=inv, hull=hull, name=name, continuous=cont)


BUILTIN_MONOTONE = ("id", "cube", "exp", "log", "jump", "l1l2")

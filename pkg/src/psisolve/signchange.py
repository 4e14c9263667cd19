"""Point of sign change (decreasing type) of a real function on an open interval.

The solver uses sign queries only, so jumps and flat pieces are fine. A
target function is any callable ``f(t) -> float``. Two optional hooks speed
things up and sharpen zero detection:

``f.evaluate_many(ts)``
    vectorised evaluation; may return ``values`` or ``(values, magnitudes)``.

When magnitudes are supplied (for a sum, the sum of absolute terms), a value
counts as zero if ``|value| <= zero_threshold * magnitude``; otherwise the
threshold is absolute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .core import OpenInterval, OutcomeKind, PsiSolveError, SignChangeOutcome, InvalidParameter

# interior points per refinement round
_SECTIONS = 64
# second look at a candidate plateau: a few ulps of the term magnitudes. Exact
# plateaus (step families) keep their width; slow crossings shrink below tol.
_FINE_ZERO = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-10
    initial_step: float = 1.0
    max_expansions: int = 200
    scan_points: int = 4096
    zero_threshold: float = 1e-13

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InvalidParameter("tolerance must be positive")
        if not self.initial_step > 0:
            raise InvalidParameter("initial_step must be positive")
        if self.max_expansions < 1:
            raise InvalidParameter("max_expansions must be at least 1")
        if self.scan_points < 16:
            raise InvalidParameter("scan_points must be at least 16")
        if not self.zero_threshold >= 0:
            raise InvalidParameter("zero_threshold must be nonnegative")


class BracketError(PsiSolveError):
    def __init__(self, message, scanned=None, witnesses=(), all_zero=False):
        super().__init__(message)
        self.scanned = scanned
        self.witnesses = tuple(witnesses)
        self.all_zero = all_zero


class NoPositiveValueFound(BracketError):
    pass


class NoNegativeValueFound(BracketError):
    pass


class IncreasingTypeFound(BracketError):
    """Sampling met ``s < t`` with ``f(s) < 0 < f(t)``."""


class _Probe:
    """Evaluates the target on arrays and turns values into signs."""

    def __init__(self, f, opts: SolverOptions, threshold: Optional[float] = None):
        self.f = f
        self.threshold = opts.zero_threshold if threshold is None else threshold
        self.many = getattr(f, "evaluate_many", None)
        self.count = 0

    def signs(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        self.count += ts.size
        if self.many is not None:
            out = self.many(ts)
        else:
            out = np.array([float(self.f(float(t))) for t in ts])
        if isinstance(out, tuple):
            vals, mags = out
            zero = self.threshold * np.asarray(mags, dtype=float)
        else:
            vals = out
            zero = self.threshold
        vals = np.asarray(vals, dtype=float)
        if np.isnan(vals).any():
            bad = float(ts[np.isnan(vals)][0])
            raise PsiSolveError(f"target function returned NaN at t={bad!r}")
        s = np.zeros(vals.shape, dtype=np.int8)
        s[vals > zero] = 1
        s[vals < -zero] = -1
        return s


def _interior(a: float, b: float, k: int) -> np.ndarray:
    pts = np.linspace(a, b, k + 2)[1:-1]
    pts = np.unique(pts)
    return pts[(pts > a) & (pts < b)]


def _seed_points(domain: OpenInterval, seeds) -> list:
    pts = []
    if seeds is not None:
        for s in np.ravel(np.asarray(seeds, dtype=float)):
            if math.isfinite(s):
                pts.append(domain.clip_inside(float(s)))
    if len(pts) >= 2:
        lo, hi = min(pts), max(pts)
        if hi > lo:
            pts.extend(np.linspace(lo, hi, 17)[1:-1].tolist())
    else:
        pts.append(domain.center())
        if domain.bounded_below and domain.bounded_above:
            pts.extend(domain.grid(15).tolist())
    return sorted(set(pts))


def _structure(ts, signs):
    """Return ``(a, b)`` for a positive-before-negative pair or raise on increasing type."""
    last_pos, first_neg, inc_lo, inc_hi = _kernels.sign_scan(signs)
    if inc_lo >= 0:
        raise IncreasingTypeFound(
            "found f(s) < 0 < f(t) with s < t",
            witnesses=[(float(ts[inc_lo]), float(ts[inc_hi]))])
    return last_pos, first_neg


def _bracket(f, domain: OpenInterval, opts: SolverOptions, seeds, probe: _Probe):
    ts = np.array(_seed_points(domain, seeds))
    signs = probe.signs(ts)
    step = opts.initial_step
    for k in range(opts.max_expansions + 1):
        order = np.argsort(ts, kind="stable")
        ts, signs = ts[order], signs[order]
        last_pos, first_neg = _structure(ts, signs)
        if first_neg >= 0 and last_pos >= 0:
            # no increasing-type pair, so every positive lies left of every negative
            return ts, signs, last_pos, first_neg
        if k == opts.max_expansions:
            break
        new = []
        need_left = last_pos < 0
        need_right = first_neg < 0
        lo, hi = float(ts[0]), float(ts[-1])
        if need_left or not need_right:
            if domain.bounded_below:
                cand = domain.lower + 0.5 * (lo - domain.lower)
            else:
                cand = lo - step * 2.0 ** k
            if cand < lo and cand in domain:
                new.append(cand)
        if need_right or not need_left:
            if domain.bounded_above:
                cand = domain.upper - 0.5 * (domain.upper - hi)
            else:
                cand = hi + step * 2.0 ** k
            if cand > hi and cand in domain:
                new.append(cand)
        if not new:
            break
        new = np.array(new)
        ts = np.concatenate([ts, new])
        signs = np.concatenate([signs, probe.signs(new)])
    scanned = (float(ts.min()), float(ts.max()))
    all_zero = not np.any(signs)
    if not np.any(signs > 0):
        raise NoPositiveValueFound(
            f"no positive value found on [{scanned[0]!r}, {scanned[1]!r}]",
            scanned=scanned, all_zero=all_zero)
    raise NoNegativeValueFound(
        f"no negative value found on [{scanned[0]!r}, {scanned[1]!r}]",
        scanned=scanned, all_zero=all_zero)


def bracket(f, domain: OpenInterval, opts: Optional[SolverOptions] = None,
            seeds: Optional[Iterable[float]] = None) -> tuple:
    """Find ``a < b`` in ``domain`` with ``f(a) > 0 > f(b)``.

    Starts from ``seeds`` (or the domain centre), then walks outward:
    geometric doubling toward unbounded ends, halving the remaining distance
    toward bounded ones.
    """
    opts = opts or SolverOptions()
    probe = _Probe(f, opts)
    ts, _, last_pos, first_neg = _bracket(f, domain, opts, seeds, probe)
    return float(ts[last_pos]), float(ts[first_neg])


def _refine(probe: _Probe, a: float, b: float, tol: float):
    """Shrink ``(a, b)`` with ``f(a) > 0 > f(b)`` to a point or a zero plateau.

    Returns ``(p_lo, p_hi, n_lo, n_hi)``: ``p_lo`` is positive, ``p_hi`` is
    not; ``n_hi`` is negative, ``n_lo`` is not. When no zero has been seen,
    ``p_hi``/``n_lo`` are ``None``.
    """
    while True:
        pts = _interior(a, b, _SECTIONS)
        if pts.size == 0 or b - a <= tol:
            return a, None, None, b
        ts = np.concatenate([[a], pts, [b]])
        signs = np.concatenate([[1], probe.signs(pts), [-1]]).astype(np.int8)
        i, j = _structure(ts, signs)
        if j == i + 1:
            a, b = float(ts[i]), float(ts[j])
            continue
        p = [float(ts[i]), float(ts[i + 1])]
        n = [float(ts[j - 1]), float(ts[j])]
        break

    while True:
        outer = n[1] - p[0]
        inner = n[0] - p[1]
        if outer <= tol:
            return p[0], p[1], n[0], n[1]
        if inner > tol and p[1] - p[0] <= tol and n[1] - n[0] <= tol:
            return p[0], p[1], n[0], n[1]
        progressed = False
        if p[1] - p[0] >= n[1] - n[0]:
            edges = (p, n)
        else:
            edges = (n, p)
        for edge in edges:
            pts = _interior(edge[0], edge[1], _SECTIONS)
            if pts.size == 0:
                continue
            ts = np.concatenate([[edge[0]], pts, [edge[1]]])
            if edge is p:
                signs = np.concatenate([[1], probe.signs(pts), [0]]).astype(np.int8)
                last_pos, first_neg = _structure(ts, signs)
                if first_neg >= 0:
                    # negative values inside the positive edge: the zero band was an artifact
                    if last_pos + 1 == first_neg:
                        return _refine(probe, float(ts[last_pos]), float(ts[first_neg]), tol)
                    p[:] = [float(ts[last_pos]), float(ts[last_pos + 1])]
                    n[:] = [float(ts[first_neg - 1]), float(ts[first_neg])]
                else:
                    p[:] = [float(ts[last_pos]), float(ts[last_pos + 1])]
            else:
                signs = np.concatenate([[0], probe.signs(pts), [-1]]).astype(np.int8)
                last_pos, first_neg = _structure(ts, signs)
                if last_pos >= 0:
                    if last_pos + 1 == first_neg:
                        return _refine(probe, float(ts[last_pos]), float(ts[first_neg]), tol)
                    p[:] = [float(ts[last_pos]), float(ts[last_pos + 1])]
                n[:] = [float(ts[first_neg - 1]), float(ts[first_neg])]
            progressed = True
            break
        if not progressed:
            return p[0], p[1], n[0], n[1]


def find_sign_change(f, domain: OpenInterval, opts: Optional[SolverOptions] = None,
                     seeds: Optional[Iterable[float]] = None) -> SignChangeOutcome:
    """Locate the point of sign change of decreasing type of ``f`` on ``domain``.

    Failures come back as outcome kinds, never as exceptions:
    ``ZeroPlateau`` when ``f`` vanishes on a stretch wider than the tolerance
    between its positive and negative parts, ``NotDecreasingType`` when a
    negative value precedes a positive one, ``NoFlip`` when no
    positive-then-negative pair can be found.
    """
    opts = opts or SolverOptions()
    tol = opts.tolerance
    probe = _Probe(f, opts)
    try:
        ts, signs, last_pos, first_neg = _bracket(f, domain, opts, seeds, probe)
        lo, hi = float(ts[0]), float(ts[-1])
        scan = np.union1d(ts, np.linspace(lo, hi, opts.scan_points))
        scan = scan[domain.contains_many(scan)]
        scan_signs = probe.signs(scan)
        last_pos, first_neg = _structure(scan, scan_signs)
        p_lo, p_hi, n_lo, n_hi = _refine(
            probe, float(scan[last_pos]), float(scan[first_neg]), tol)
    except IncreasingTypeFound as exc:
        return SignChangeOutcome(OutcomeKind.NOT_DECREASING_TYPE, witnesses=exc.witnesses,
                                 message=str(exc), evaluations=probe.count)
    except BracketError as exc:
        if exc.all_zero and exc.scanned is not None and exc.scanned[1] - exc.scanned[0] > tol:
            return SignChangeOutcome(OutcomeKind.ZERO_PLATEAU, plateau=exc.scanned,
                                     message="function vanishes on every scanned point",
                                     evaluations=probe.count)
        return SignChangeOutcome(OutcomeKind.NO_FLIP, witnesses=(exc.scanned,) if exc.scanned else (),
                                 message=str(exc), evaluations=probe.count)

    if p_hi is None:
        return SignChangeOutcome(OutcomeKind.POINT, location=0.5 * (p_lo + n_hi),
                                 bracket=(p_lo, n_hi), evaluations=probe.count)
    if n_lo - p_hi > tol and opts.zero_threshold > _FINE_ZERO:
        fine = _Probe(f, opts, threshold=_FINE_ZERO)
        try:
            q = _refine(fine, p_lo, n_hi, tol)
        except IncreasingTypeFound:
            q = None
        probe.count += fine.count
        if q is not None and (q[1] is None or q[2] - q[1] <= tol):
            p_lo, p_hi, n_lo, n_hi = q
            if p_hi is None:
                return SignChangeOutcome(OutcomeKind.POINT, location=0.5 * (p_lo + n_hi),
                                         bracket=(p_lo, n_hi), evaluations=probe.count)
    if n_lo - p_hi > tol:
        return SignChangeOutcome(OutcomeKind.ZERO_PLATEAU, plateau=(p_hi, n_lo),
                                 message="function vanishes between its positive and negative parts",
                                 evaluations=probe.count)
    mid = 0.5 * (p_hi + n_lo)
    return SignChangeOutcome(OutcomeKind.POINT, location=min(max(mid, p_lo), n_hi),
                             bracket=(p_lo, n_hi), evaluations=probe.count)


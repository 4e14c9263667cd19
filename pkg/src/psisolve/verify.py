"""Grid-level checks of the existence and uniqueness conditions for
ψ-estimators, and reproductions of the known counterexamples.

A ``holds-on-grid`` verdict is evidence, never proof: it only says that no
violation was seen at the grid points listed in the report. A ``violated``
verdict carries witnesses that re-evaluate to the failing inequality.

Strictness on a grid means ``f(u) < f(v) - 1e-13 * max(1, |f(u)|)``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import (
    OpenInterval,
    OutcomeKind,
    PsiSolveError,
    WeightedSample,
    validate_weighted_sample,
)
from .estimators import estimate
from .psifamilies import PsiFamily, make_family, normal_mixture, table_family
from .signchange import SolverOptions

HOLDS = "holds-on-grid"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
VERDICTS = (HOLDS, VIOLATED, INCONCLUSIVE)

DEFAULT_SEED = 0xC0FFEE
STRICT_MARGIN = 1e-13
DEFAULT_GRID = 4096


class Theta1Order(PsiSolveError, ValueError):
    """``ϑ₁(x) < ϑ₁(y)`` is required."""


class UnknownId(PsiSolveError, KeyError):
    pass


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    verdict: str
    witnesses: tuple = ()
    grid: dict = field(default_factory=dict)
    margin: Optional[float] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == VIOLATED and not self.witnesses:
            raise ValueError("a violated verdict needs witnesses")

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def to_dict(self) -> dict:
        return {
            "property_id": self.property_id,
            "verdict": self.verdict,
            "witnesses": _plain(self.witnesses),
            "grid": _plain(self.grid),
            "margin": self.margin,
            "details": _plain(self.details),
        }


def _plain(obj):
    """Tuples, numpy scalars and enums to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, OutcomeKind):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _grid_info(domain: OpenInterval, ts: np.ndarray, **extra) -> dict:
    info = {
        "domain": str(domain),
        "count": int(ts.size),
        "first": float(ts[0]) if ts.size else None,
        "last": float(ts[-1]) if ts.size else None,
        "strict_margin": STRICT_MARGIN,
    }
    info.update(extra)
    return info


def _values(f, ts) -> np.ndarray:
    with np.errstate(all="ignore"):
        out = np.asarray(f(ts), dtype=float)
    if out.shape != ts.shape:
        out = np.array([float(f(float(t))) for t in ts])
    return out


# ---------------------------------------------------------------------------
# ratio functions


class RatioFunction:
    """``t -> -ψ(x, t) / ψ(y, t)`` on ``(ϑ₁(x), ϑ₁(y))``.

    ``variant="share"`` gives ``ψ(x, t) / (ψ(x, t) - ψ(y, t))`` instead, the
    form whose strict ``1/n``-increase is necessary for ``T_n``.
    """

    def __init__(self, family: PsiFamily, x: float, y: float, variant: str = "ratio"):
        if not family.has_theta1:
            raise Theta1Order(f"{family.name} has no analytic theta1")
        if variant not in ("ratio", "share"):
            raise ValueError("variant must be 'ratio' or 'share'")
        family.check_points([x, y])
        a, b = float(family.theta1_fn(x)), float(family.theta1_fn(y))
        if not a < b:
            raise Theta1Order(f"theta1(x) = {a!r} is not below theta1(y) = {b!r}")
        self.family, self.x, self.y, self.variant = family, float(x), float(y), variant
        self.domain = OpenInterval(a, b)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        px = self.family(self.x, t)
        py = self.family(self.y, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -px / py if self.variant == "ratio" else px / (px - py)
        out = np.asarray(out, dtype=float)
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# generic grid checks


def _level_case(values: np.ndarray, y: float) -> str:
    if np.all(values > y):
        return "i"
    if np.all(values < y):
        return "ii"
    return "iii"


def check_level_of_increase(f: Callable, domain: OpenInterval, y: float,
                            grid_count: int = DEFAULT_GRID) -> PropertyReport:
    """Is ``y`` a level of increase, i.e. does ``y <= f(u)`` force ``y < f(v)`` for ``v > u``?

    An exact violation gives ``violated``. A violation that only appears once
    values within ``1e-13 * max(1, |y|)`` of ``y`` are treated as equal to
    ``y`` gives ``inconclusive``. Otherwise the report classifies which of
    ``y < f``, ``y > f`` or a sign change of ``y - f`` was seen.
    """
    if grid_count < 16:
        raise ValueError("grid_count must be at least 16")
    y = float(y)
    ts = domain.grid(grid_count)
    vals = _values(f, ts)
    info = _grid_info(domain, ts, level=y)
    pid = f"level-of-increase(y={y!r})"
    u, v = _kernels.level_scan(vals, y)
    if u >= 0:
        margin = min(vals[u] - y, y - vals[v])
        return PropertyReport(pid, VIOLATED, ((float(ts[u]), float(ts[v])),), info, float(margin),
                              {"f_u": float(vals[u]), "f_v": float(vals[v])})
    band = STRICT_MARGIN * max(1.0, abs(y))
    snapped = np.where(np.abs(vals - y) <= band, y, vals)
    u, v = _kernels.level_scan(snapped, y)
    if u >= 0:
        return PropertyReport(pid, INCONCLUSIVE, ((float(ts[u]), float(ts[v])),), info, 0.0,
                              {"reason": "values within rounding of the level"})
    above = np.flatnonzero(vals >= y)
    margin = float(vals[above[0] + 1:].min() - y) if above.size and above[0] + 1 < vals.size else None
    return PropertyReport(pid, HOLDS, (), info, margin, {"case": _level_case(vals, y)})


def check_eps_increasing(f: Callable, domain: OpenInterval, eps: float, strict: bool = True,
                         grid_count: int = DEFAULT_GRID) -> PropertyReport:
    """``f(u) <= f(v) + eps`` (``<`` when ``strict``) for all grid pairs ``u < v``."""
    if grid_count < 16:
        raise ValueError("grid_count must be at least 16")
    if not eps >= 0:
        raise ValueError("eps must be nonnegative")
    ts = domain.grid(grid_count)
    vals = _values(f, ts)
    u, v, margin = _kernels.increase_scan(vals, float(eps), bool(strict), STRICT_MARGIN)
    kind = "strictly " if strict else ""
    pid = f"{kind}{eps!r}-increasing"
    info = _grid_info(domain, ts, eps=float(eps), strict=bool(strict))
    margin = None if not math.isfinite(margin) else float(margin)
    if u >= 0:
        return PropertyReport(pid, VIOLATED, ((float(ts[u]), float(ts[v])),), info, margin,
                              {"f_u": float(vals[u]), "f_v": float(vals[v])})
    return PropertyReport(pid, HOLDS, (), info, margin)


def check_ratio_monotone(family: PsiFamily, x: float, y: float, grid_count: int = DEFAULT_GRID,
                         strict: bool = True) -> PropertyReport:
    ratio = RatioFunction(family, x, y)
    rep = check_eps_increasing(ratio, ratio.domain, 0.0, strict, grid_count)
    pid = f"ratio-{'strictly-' if strict else ''}increasing({family.name}, x={x!r}, y={y!r})"
    return PropertyReport(pid, rep.verdict, rep.witnesses, rep.grid, rep.margin, rep.details)


def check_levels_for_Tn(family: PsiFamily, x: float, y: float, n: int,
                        grid_count: int = DEFAULT_GRID) -> PropertyReport:
    """Every ``k/(n-k)`` must be a level of increase of the ratio function when ψ is ``T_n``.

    A violation therefore certifies that ψ is not a ``T_n``-function.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    ratio = RatioFunction(family, x, y)
    per_level = {}
    witnesses = []
    verdicts = []
    margins = []
    grid = None
    for k in range(1, n):
        level = k / (n - k)
        rep = check_level_of_increase(ratio, ratio.domain, level, grid_count)
        grid = rep.grid
        per_level[f"{k}/{n - k}"] = rep.verdict
        verdicts.append(rep.verdict)
        if rep.margin is not None:
            margins.append(rep.margin)
        if rep.verdict == VIOLATED:
            witnesses.extend({"level": level, "u": w[0], "v": w[1]} for w in rep.witnesses)
    if VIOLATED in verdicts:
        verdict = VIOLATED
    elif INCONCLUSIVE in verdicts:
        verdict = INCONCLUSIVE
    else:
        verdict = HOLDS
    grid = dict(grid or {})
    grid.pop("level", None)
    return PropertyReport(f"levels-for-T{n}({family.name}, x={x!r}, y={y!r})", verdict,
                          tuple(witnesses), grid, min(margins) if margins else None,
                          {"levels": per_level})


def check_Tn_lambda(family: PsiFamily, corpus: Sequence[WeightedSample],
                    opts: Optional[SolverOptions] = None,
                    workers: Optional[int] = None) -> PropertyReport:
    """Estimate on every sample; one non-Point outcome refutes ``T_n^λ`` for that ``(n, λ)``.

    With ``workers > 1`` samples are solved on a thread pool; the report is
    identical to the sequential one.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must not be empty")
    opts = opts or SolverOptions()

    def run(sample):
        return estimate(family, sample, opts).outcome

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, corpus))
    else:
        outcomes = [run(s) for s in corpus]
    counts = {k.value: 0 for k in OutcomeKind}
    witnesses = []
    for sample, out in zip(corpus, outcomes):
        counts[out.kind.value] += 1
        if not out.is_point:
            witnesses.append({
                "points": list(sample.points),
                "weights": list(sample.weights),
                "kind": out.kind.value,
                "plateau": list(out.plateau) if out.plateau else None,
            })
    verdict = VIOLATED if witnesses else HOLDS
    info = {"samples": len(corpus), "tolerance": opts.tolerance, "scan_points": opts.scan_points}
    return PropertyReport(f"T_n^lambda({family.name})", verdict, tuple(witnesses[:10]), info,
                          None, {"outcomes": counts, "failures": len(witnesses)})


def random_corpus(family: PsiFamily, count: int, n_max: int = 7, seed: int = DEFAULT_SEED,
                  unit_weights: bool = False, n_min: int = 1) -> list:
    """Reproducible random samples inside the family's sample space."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        if family.x_domain is not None and family.x_domain.bounded_below and family.x_domain.bounded_above:
            lo, hi = family.x_domain.lower, family.x_domain.upper
            pts = lo + (hi - lo) * rng.uniform(0.01, 0.99, n)
        else:
            pts = rng.uniform(-10.0, 10.0, n)
        w = np.ones(n) if unit_weights else rng.uniform(0.1, 5.0, n)
        corpus.append(validate_weighted_sample(pts, w))
    return corpus


# ---------------------------------------------------------------------------
# exact classification of piecewise functions on finite sample spaces


def classify_piecewise(f: Callable, breakpoints: Sequence[float]) -> dict:
    """Sign-change status of ``f`` whose sign is constant between consecutive breakpoints.

    ``f`` is evaluated at each breakpoint, at the midpoint of each gap and one
    unit beyond either end, which determines its sign everywhere.
    """
    bps = sorted(set(float(b) for b in breakpoints))
    probes = [bps[0] - 1.0]
    is_bp = [False]
    for i, b in enumerate(bps):
        probes.append(b)
        is_bp.append(True)
        nxt = bps[i + 1] if i + 1 < len(bps) else b + 2.0
        probes.append(0.5 * (b + nxt))
        is_bp.append(False)
    signs = [int(np.sign(f(t))) for t in probes]
    zeros = [t for t, s, bp in zip(probes, signs, is_bp) if s == 0 and bp]
    for j, (t, bp) in enumerate(zip(probes, is_bp)):
        if bp and all(s > 0 for s in signs[:j]) and all(s < 0 for s in signs[j + 1:]):
            return {"kind": OutcomeKind.POINT.value, "location": t, "zeros": zeros}
    neg = [i for i, s in enumerate(signs) if s < 0]
    if neg and any(s > 0 for s in signs[neg[0]:]):
        return {"kind": OutcomeKind.NOT_DECREASING_TYPE.value, "location": None, "zeros": zeros}
    for i, (s, bp) in enumerate(zip(signs, is_bp)):
        if s == 0 and not bp:
            lo = probes[i - 1]
            hi = probes[i + 1] if i + 1 < len(probes) else math.inf
            return {"kind": OutcomeKind.ZERO_PLATEAU.value, "location": None,
                    "plateau": [lo, hi], "zeros": zeros}
    return {"kind": OutcomeKind.NO_FLIP.value, "location": None, "zeros": zeros}


def _sum_function(family: PsiFamily, points) -> Callable:
    pts = [float(p) for p in points]
    return lambda t: math.fsum(family(p, t) for p in pts)


# ---------------------------------------------------------------------------
# reproductions


def step_family(weights: Sequence[float], thresholds: Optional[Sequence[float]] = None) -> PsiFamily:
    """``ψ(i, t) = w_i`` for ``t < c_i`` and ``-w_i`` for ``t >= c_i`` on ``X = {1, ..., m}``.

    ``c_i = i`` by default.
    """
    w = np.asarray(weights, dtype=float)
    c = np.arange(1, w.size + 1, dtype=float) if thresholds is None else np.asarray(thresholds, float)

    def psi(x, t):
        idx = np.asarray(x, dtype=int) - 1
        return np.where(t < c[idx], w[idx], -w[idx])

    return table_family("step:w=" + ",".join(repr(float(v)) for v in w), psi,
                        support=range(1, w.size + 1),
                        theta1={float(i + 1): float(c[i]) for i in range(w.size)})


def _ex_t2_case(w) -> dict:
    fam = step_family(w)
    m = len(w)
    table = {}
    ok = True
    for i, j in itertools.product(range(1, m + 1), repeat=2):
        res = classify_piecewise(_sum_function(fam, [i, j]), range(1, m + 1))
        table[f"{i},{j}"] = res["location"] if res["kind"] == "Point" else res["kind"]
        if i == j:
            expected = float(i)
        elif w[i - 1] == w[j - 1]:
            expected = None
        else:
            expected = float(i if w[i - 1] > w[j - 1] else j)
        got = res["location"] if res["kind"] == "Point" else None
        ok &= got == expected
    holds = all(isinstance(v, float) for v in table.values())
    distinct = len(set(w)) == len(w)
    return {"w": list(map(float, w)), "T2_holds": holds,
            "expected_T2_holds": distinct, "theta2": table,
            "match": bool(ok and holds == distinct)}


def _reproduce_t2(w=None, seed=DEFAULT_SEED) -> PropertyReport:
    cases = [_ex_t2_case(w)] if w is not None else [_ex_t2_case((1.0, 2.0)), _ex_t2_case((1.0, 1.0))]
    witnesses = []
    for c in cases:
        witnesses.extend({"w": c["w"], "pair": k, "outcome": v}
                         for k, v in c["theta2"].items() if not isinstance(v, float))
    expected = ["T2 holds" if c["expected_T2_holds"] else "T2 fails" for c in cases]
    computed = ["T2 holds" if c["T2_holds"] else "T2 fails" for c in cases]
    match = all(c["match"] for c in cases)
    return PropertyReport("ex-T2-fail", VIOLATED if witnesses else HOLDS, tuple(witnesses),
                          {"exhaustive": "X^2"}, None,
                          {"expected": expected, "computed": computed, "match": match, "cases": cases})


def _not_omitted_family() -> PsiFamily:
    def psi(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        first = np.where(t < 1, 2.0, np.where(t <= 2, -t, -2.0))
        second = np.where(t < 2, 1.0, np.where(t == 2, 2.0, -1.0))
        return np.where(x == 1, first, second)

    return table_family("ex-not-omitted", psi, support=(1, 2), theta1={1.0: 1.0, 2.0: 2.0})


def _reproduce_not_omitted(w=None, seed=DEFAULT_SEED) -> PropertyReport:
    fam = _not_omitted_family()
    singles = [classify_piecewise(_sum_function(fam, [x]), (1, 2)) for x in (1, 2)]
    t1_ok = [s["kind"] == "Point" for s in singles] == [True, True] and \
        [s["location"] for s in singles] == [1.0, 2.0]
    nonzero_at_theta1 = fam(1, 1.0) != 0 and fam(2, 2.0) != 0
    res = classify_piecewise(_sum_function(fam, [1, 2]), (1, 2))
    expected = {"kind": "no point of sign change", "zeros": [1.0, 2.0]}
    match = bool(t1_ok and nonzero_at_theta1 and res["kind"] != "Point" and res["zeros"] == [1.0, 2.0])
    witnesses = ({"sample": [1, 2], "kind": res["kind"], "zeros": res["zeros"]},)
    return PropertyReport("ex-not-omitted", VIOLATED, witnesses, {"exhaustive": "breakpoints"}, None,
                          {"expected": expected, "computed": res, "match": match,
                           "T1": t1_ok, "psi_at_theta1_nonzero": nonzero_at_theta1})


def _reproduce_div_noomit(w=None, seed=DEFAULT_SEED, n: int = 3, k: int = 2) -> PropertyReport:
    fam = step_family((k - 1.0, 1.0))
    tn = {}
    for ys in itertools.product((1, 2), repeat=n):
        res = classify_piecewise(_sum_function(fam, ys), (1, 2))
        n1 = ys.count(1)
        expected = 1.0 if n - n1 * k < 0 else 2.0
        tn[",".join(map(str, ys))] = (res["location"] if res["kind"] == "Point" else res["kind"], expected)
    tn_holds = all(got == exp for got, exp in tn.values())
    z = [1] + [2] * (k - 1)
    zres = classify_piecewise(_sum_function(fam, z), (1, 2))
    match = tn_holds and zres["kind"] == "ZeroPlateau"
    return PropertyReport(
        "ex-div-noomit", VIOLATED,
        ({"sample": z, "kind": zres["kind"], "plateau": zres.get("plateau")},),
        {"exhaustive": f"X^{n}", "n": n, "k": k}, None,
        {"expected": {f"T{n}": "holds", f"T{k}": "fails (zero plateau)"},
         "computed": {f"T{n}": "holds" if tn_holds else "fails", f"T{k}": zres["kind"]},
         "match": bool(match),
         "theta_n": {key: got for key, (got, _) in tn.items()}})


def _reproduce_huber(w=None, seed=DEFAULT_SEED) -> PropertyReport:
    fam = make_family("mathieu:huber:beta=1")
    res = estimate(fam, validate_weighted_sample([0.0, 3.0]))
    out = res.outcome
    corpus = random_corpus(fam, 20, n_max=2, n_min=2, seed=seed, unit_weights=True)
    random_rep = check_Tn_lambda(fam, corpus)
    match = out.kind is OutcomeKind.ZERO_PLATEAU
    return PropertyReport(
        "huber-T2", VIOLATED,
        ({"sample": [0.0, 3.0], "kind": out.kind.value, "plateau": list(out.plateau or ())},),
        {"beta": 1.0}, None,
        {"expected": "no-sign-change", "computed": out.kind.value, "match": match,
         "random_pairs": {"seed": seed, "failures": random_rep.details["failures"], "samples": 20}})


def _reproduce_median_even(w=None, seed=DEFAULT_SEED) -> PropertyReport:
    res = estimate(make_family("median"), validate_weighted_sample([1.0, 2.0]))
    out = res.outcome
    match = (out.kind is OutcomeKind.ZERO_PLATEAU and abs(out.plateau[0] - 1.0) <= 1e-8
             and abs(out.plateau[1] - 2.0) <= 1e-8 and res.closed_form == 1.5)
    return PropertyReport(
        "median-even", VIOLATED,
        ({"sample": [1.0, 2.0], "kind": out.kind.value, "plateau": list(out.plateau or ())},),
        {}, None,
        {"expected": {"kind": "ZeroPlateau", "plateau": [1.0, 2.0], "closed_form": 1.5},
         "computed": {"kind": out.kind.value, "plateau": list(out.plateau or ()),
                      "closed_form": res.closed_form},
         "match": bool(match)})


def _reproduce_mixture(w=None, seed=DEFAULT_SEED) -> PropertyReport:
    rep = check_ratio_monotone(normal_mixture(1.0), 1.0, 5.0, DEFAULT_GRID, strict=False)
    inside = all(1.0 < u < v < 5.0 for u, v in rep.witnesses)
    match = rep.verdict == VIOLATED and inside
    details = dict(rep.details)
    details.update({"expected": "not increasing on (1, 5)", "computed": rep.verdict, "match": bool(match)})
    return PropertyReport("mixture-ratio", rep.verdict, rep.witnesses, rep.grid, rep.margin, details)


REPRODUCTIONS = {
    "ex-T2-fail": _reproduce_t2,
    "ex-not-omitted": _reproduce_not_omitted,
    "ex-div-noomit": _reproduce_div_noomit,
    "huber-T2": _reproduce_huber,
    "median-even": _reproduce_median_even,
    "mixture-ratio": _reproduce_mixture,
}


def reproduce(example_id: str, w: Optional[Sequence[float]] = None,
              seed: int = DEFAULT_SEED) -> PropertyReport:
    """Rebuild a known counterexample and compare with its published verdict.

    ``details`` holds ``expected``, ``computed`` and ``match``. ``w`` sets the
    weights of ``ex-T2-fail`` (default: both ``(1, 2)`` and ``(1, 1)``).
    """
    try:
        fn = REPRODUCTIONS[example_id]
    except KeyError:
        raise UnknownId(f"unknown example {example_id!r}; choose from "
                        f"{', '.join(REPRODUCTIONS)} or 'all'") from None
    return fn(w=w, seed=seed)


def reproduce_all(seed: int = DEFAULT_SEED) -> list:
    return [reproduce(name, seed=seed) for name in REPRODUCTIONS]

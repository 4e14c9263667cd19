"""Catalogue of ψ-families ``ψ: X × Θ → R`` with their metadata.

Every family evaluates with numpy broadcasting: ``family.psi(x, t)`` accepts
arrays of any compatible shapes. ``sign(0) = 0`` throughout, so
``ψ(x, x) = 0`` for the median, quantile and Mathieu-type families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import expit

from .core import DomainError, InvalidParameter, OpenInterval, PsiSolveError, WeightedSample
from .leftinv import (
    BUILTIN_MONOTONE,
    MonotoneFunction,
    OutOfHull,
    builtin_monotone,
    generalized_left_inverse,
)

R = OpenInterval()
POSITIVE = OpenInterval(0.0, None)
UNIT = OpenInterval(0.0, 1.0)


class NoAnalyticTheta1(PsiSolveError, LookupError):
    pass


@dataclass(frozen=True, eq=False)
class PsiFamily:
    name: str
    psi: Callable
    theta: OpenInterval
    continuous_in_t: bool
    strictly_decreasing_in_t: bool
    theta1_fn: Optional[Callable] = None
    closed_form_fn: Optional[Callable] = None
    x_domain: Optional[OpenInterval] = None
    x_support: Optional[frozenset] = None
    params: Mapping = field(default_factory=dict)
    # True when some positive multiple h(t)·ψ is strictly decreasing in t
    decreasing_up_to_equivalence: bool = False
    point_check: Optional[Callable] = None

    def __call__(self, x, t):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self.psi(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        out = np.asarray(out, dtype=float)
        return float(out) if out.ndim == 0 else out

    @property
    def has_theta1(self) -> bool:
        return self.theta1_fn is not None

    def check_points(self, points) -> None:
        """Raise ``DomainError`` if any point falls outside the family's sample space."""
        pts = np.asarray(points, dtype=float)
        if self.x_domain is not None and not self.x_domain.contains_all(pts):
            bad = [p for p in pts.ravel() if p not in self.x_domain][0]
            raise DomainError(f"{self.name}: x={bad!r} outside X={self.x_domain}")
        if self.x_support is not None:
            bad = [p for p in pts.ravel() if float(p) not in self.x_support]
            if bad:
                raise DomainError(f"{self.name}: x={bad[0]!r} not in the finite sample space")
        if self.point_check is not None:
            self.point_check(pts)

    def __repr__(self) -> str:
        return f"PsiFamily({self.name})"


def _sign(z):
    return np.sign(z)


# ---------------------------------------------------------------------------
# Mathieu-type odd extensions sign(x - t) f(|x - t|)

MATHIEU_KINDS = ("huber", "catoni", "poly", "catoni2", "l1l2", "fair")


@dataclass(frozen=True)
class MathieuSpec:
    kind: str
    beta: float = 1.0
    b: float = 1.0
    p: int = 1
    alpha: float = 1.5

    def __post_init__(self):
        if self.kind not in MATHIEU_KINDS:
            raise InvalidParameter(f"unknown Mathieu function {self.kind!r}")
        if self.kind in ("huber", "poly") and not self.beta > 0:
            raise InvalidParameter("beta must be positive")
        if self.kind == "catoni" and not self.b > 0:
            raise InvalidParameter("b must be positive")
        if self.kind == "poly" and (int(self.p) != self.p or self.p < 1):
            raise InvalidParameter("p must be a positive integer")
        if self.kind == "catoni2" and not 1.0 < self.alpha < 2.0:
            raise InvalidParameter("alpha must lie in (1, 2)")

    @property
    def strictly_increasing(self) -> bool:
        return self.kind != "huber"

    def label(self) -> str:
        if self.kind == "huber":
            return f"huber:beta={self.beta!r}"
        if self.kind == "catoni":
            return f"catoni:b={self.b!r}"
        if self.kind == "poly":
            return f"poly:p={int(self.p)},beta={self.beta!r}"
        if self.kind == "catoni2":
            return f"catoni2:alpha={self.alpha!r}"
        return self.kind


def eval_f_mathieu(spec: MathieuSpec, z):
    """The nonnegative profile ``f`` of a Mathieu-type ψ at ``z >= 0``."""
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if spec.kind == "huber":
            out = np.minimum(z, spec.beta)
        elif spec.kind == "catoni":
            u = z / spec.b
            # ln(1 + u + u^2/2) without overflowing u^2 for huge u
            big = u > 1e100
            us = np.where(big, 1.0, u)
            ub = np.where(big, u, 1.0)
            out = np.where(big,
                           2.0 * np.log(ub) - math.log(2.0) + np.log1p(2.0 / ub + 2.0 / (ub * ub)),
                           np.log1p(us + 0.5 * us * us))
        elif spec.kind == "poly":
            out = z / (1.0 + (z / spec.beta) ** (1.0 - 1.0 / spec.p))
        elif spec.kind == "catoni2":
            out = np.log1p(z + z ** spec.alpha / spec.alpha)
        elif spec.kind == "l1l2":
            out = z / np.hypot(1.0, z / math.sqrt(2.0))
        else:
            out = z / (1.0 + z)
    return float(out) if out.ndim == 0 else out


def mathieu(spec: MathieuSpec) -> PsiFamily:
    def psi(x, t):
        d = x - t
        return _sign(d) * eval_f_mathieu(spec, np.abs(d))

    return PsiFamily(
        name=f"mathieu:{spec.label()}",
        psi=psi,
        theta=R,
        continuous_in_t=True,
        strictly_decreasing_in_t=spec.strictly_increasing,
        theta1_fn=lambda x: x,
        params={"f": spec.kind, **_spec_params(spec)},
    )


def _spec_params(spec: MathieuSpec) -> dict:
    return {
        "huber": {"beta": spec.beta},
        "catoni": {"b": spec.b},
        "poly": {"p": int(spec.p), "beta": spec.beta},
        "catoni2": {"alpha": spec.alpha},
    }.get(spec.kind, {})


# ---------------------------------------------------------------------------
# descriptive statistics


def _order_stat(sample: WeightedSample, k: int) -> float:
    """1-based order statistic."""
    return float(np.sort(sample.x)[k - 1])


def _median_closed_form(sample: WeightedSample) -> Optional[float]:
    if not sample.has_equal_weights():
        return None
    n = sample.n
    return 0.5 * (_order_stat(sample, math.ceil(n / 2)) + _order_stat(sample, math.floor(n / 2 + 1)))


def median() -> PsiFamily:
    return PsiFamily(
        name="median",
        psi=lambda x, t: _sign(x - t),
        theta=R,
        continuous_in_t=False,
        strictly_decreasing_in_t=False,
        theta1_fn=lambda x: x,
        closed_form_fn=_median_closed_form,
    )


def quantile_level_is_lattice(alpha: float, n: int) -> bool:
    """Whether ``alpha`` is one of ``1/n, ..., (n-1)/n`` up to float rounding."""
    k = n * alpha
    return abs(k - round(k)) <= 8 * np.finfo(float).eps * max(1, n) and 1 <= round(k) <= n - 1


def quantile(alpha: float) -> PsiFamily:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter("quantile level alpha must lie in (0, 1)")

    def psi(x, t):
        return np.where(x > t, alpha, np.where(x < t, alpha - 1.0, 0.0))

    def closed(sample: WeightedSample) -> Optional[float]:
        n = sample.n
        if not sample.has_equal_weights() or quantile_level_is_lattice(alpha, n):
            return None
        na = n * alpha
        return 0.5 * (_order_stat(sample, math.ceil(na)) + _order_stat(sample, math.floor(na + 1)))

    return PsiFamily(
        name=f"quantile:alpha={alpha!r}",
        psi=psi,
        theta=R,
        continuous_in_t=False,
        strictly_decreasing_in_t=False,
        theta1_fn=lambda x: x,
        closed_form_fn=closed,
        params={"alpha": alpha},
    )


def expectile(alpha: float) -> PsiFamily:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter("expectile level alpha must lie in (0, 1)")

    def psi(x, t):
        d = x - t
        return np.where(d > 0, alpha * d, (1.0 - alpha) * d)

    return PsiFamily(
        name=f"expectile:alpha={alpha!r}",
        psi=psi,
        theta=R,
        continuous_in_t=True,
        strictly_decreasing_in_t=True,
        theta1_fn=lambda x: x,
        params={"alpha": alpha},
    )


# ---------------------------------------------------------------------------
# Bajraktarevic-type ψ(x, t) = p(x) (φ(x) - f(t))

P_WEIGHTS = ("one", "absphi1", "abs1")


def bajraktarevic(f: MonotoneFunction, p: Callable = None, phi: Callable = None,
                  name: Optional[str] = None) -> PsiFamily:
    """``p`` must be positive on X and ``φ`` must map X into the range hull of ``f``.

    Defaults: ``p ≡ 1`` and ``φ = f`` (so ``θ₁(x) = x`` on Θ).
    """
    p = p if p is not None else (lambda x: np.ones_like(np.asarray(x, dtype=float)))
    phi = phi if phi is not None else f

    def psi(x, t):
        return p(x) * (phi(x) - f(t))

    def check(points):
        hull = f.range_hull()
        ph = np.asarray(phi(points), dtype=float)
        if not hull.contains_all(ph):
            raise DomainError(f"phi(x) leaves the range hull {hull} of {f.name}")
        pw = np.asarray(p(points), dtype=float)
        if not np.all(pw > 0):
            raise DomainError("p(x) must be positive")

    def theta1(x):
        return generalized_left_inverse(f, float(phi(np.asarray(float(x)))))

    def closed(sample: WeightedSample) -> Optional[float]:
        x, w = sample.x, sample.w
        pw = w * np.asarray(p(x), dtype=float)
        y = math.fsum(pw * np.asarray(phi(x), dtype=float)) / math.fsum(pw)
        try:
            return generalized_left_inverse(f, y)
        except OutOfHull:
            return None

    return PsiFamily(
        name=name or f"bajraktarevic:{f.name}",
        psi=psi,
        theta=f.domain,
        continuous_in_t=f.continuous,
        strictly_decreasing_in_t=True,
        theta1_fn=theta1,
        closed_form_fn=closed,
        params={"f": f.name},
        point_check=check,
    )


def bajraktarevic_builtin(f_name: str, p_name: str = "one", phi_name: str = "f") -> PsiFamily:
    f = builtin_monotone(f_name)
    if phi_name == "f":
        phi = f
    elif phi_name in BUILTIN_MONOTONE:
        phi = builtin_monotone(phi_name)
    else:
        raise InvalidParameter(f"unknown phi {phi_name!r}")
    if p_name == "one":
        p = None
    elif p_name == "absphi1":
        def p(x):
            return np.abs(phi(x)) + 1.0
    elif p_name == "abs1":
        def p(x):
            return np.abs(np.asarray(x, dtype=float)) + 1.0
    else:
        raise InvalidParameter(f"unknown weight function p={p_name!r}; choose from {P_WEIGHTS}")
    fam = bajraktarevic(f, p, phi, name=f"bajraktarevic:{f_name}:p={p_name},phi={phi_name}")
    return _with_params(fam, {"f": f_name, "p": p_name, "phi": phi_name})


def _with_params(fam: PsiFamily, params: dict) -> PsiFamily:
    object.__setattr__(fam, "params", dict(params))
    return fam


# ---------------------------------------------------------------------------
# likelihood equations


def _weighted_mean(values, weights) -> float:
    return math.fsum(np.asarray(values) * weights) / math.fsum(weights)


def normal_mean(sigma: float = 1.0) -> PsiFamily:
    sigma = float(sigma)
    if not sigma > 0:
        raise InvalidParameter("sigma must be positive")
    s2 = sigma * sigma
    return PsiFamily(
        name=f"normal-mean:sigma={sigma!r}",
        psi=lambda x, t: (x - t) / s2,
        theta=R,
        continuous_in_t=True,
        strictly_decreasing_in_t=True,
        theta1_fn=lambda x: x,
        closed_form_fn=lambda s: _weighted_mean(s.x, s.w),
        params={"sigma": sigma},
    )


def normal_var(m: float = 0.0, form: str = "rescaled") -> PsiFamily:
    """Likelihood equation for the variance ``s = σ²`` with known mean ``m``.

    ``form="rescaled"`` gives ``(x - m)² - s``, which is ``2s²`` times the raw
    score ``((x - m)² - s) / (2s²)`` and so has the same estimator.
    """
    m = float(m)
    if form not in ("rescaled", "raw"):
        raise InvalidParameter("form must be 'rescaled' or 'raw'")

    def theta1(x):
        v = (float(x) - m) ** 2
        if not v > 0:
            raise DomainError(f"theta1({x!r}) = 0 lies outside (0, inf)")
        return v

    if form == "rescaled":
        def psi(x, s):
            return (x - m) ** 2 - s
    else:
        def psi(x, s):
            return ((x - m) ** 2 - s) / (2.0 * s * s)

    def check(points):
        if np.any(np.asarray(points) == m):
            raise DomainError(f"x = m = {m!r} has no root in (0, inf); X excludes m")

    return PsiFamily(
        name=f"normal-var:m={m!r}" + ("" if form == "rescaled" else ",form=raw"),
        psi=psi,
        theta=POSITIVE,
        continuous_in_t=True,
        strictly_decreasing_in_t=form == "rescaled",
        theta1_fn=theta1,
        closed_form_fn=lambda s: _weighted_mean((s.x - m) ** 2, s.w),
        params={"m": m, "form": form},
        decreasing_up_to_equivalence=True,
        point_check=check,
    )


def ism() -> PsiFamily:
    """Score for ``α`` in the density ``2αx(1 - x²)^(α-1)`` on (0, 1)."""

    def psi(x, a):
        return 1.0 / a + np.log1p(-x * x)

    def theta1(x):
        x = float(x)
        if not 0.0 < x < 1.0:
            raise DomainError(f"x={x!r} outside (0, 1)")
        return -1.0 / math.log1p(-x * x)

    def closed(sample: WeightedSample) -> float:
        return -math.fsum(sample.w) / math.fsum(sample.w * np.log1p(-sample.x ** 2))

    return PsiFamily(
        name="ism",
        psi=psi,
        theta=POSITIVE,
        continuous_in_t=True,
        strictly_decreasing_in_t=True,
        theta1_fn=theta1,
        closed_form_fn=closed,
        x_domain=UNIT,
    )


def normal_mixture(sigma: float = 1.0) -> PsiFamily:
    """Score in ``m`` of the half-half mixture of N(0, 1) and N(m, σ²).

    Written as ``(x - m)/σ² · w`` with ``w`` the posterior weight of the
    second component, computed through a logistic of log-density differences.
    """
    sigma = float(sigma)
    if not sigma > 0:
        raise InvalidParameter("sigma must be positive")
    s2 = sigma * sigma
    log_sigma = math.log(sigma)

    def psi(x, m):
        d = x - m
        logit = x * x / 2.0 - d * d / (2.0 * s2) - log_sigma
        return d / s2 * expit(logit)

    return PsiFamily(
        name=f"normal-mixture:sigma={sigma!r}",
        psi=psi,
        theta=R,
        continuous_in_t=True,
        strictly_decreasing_in_t=False,
        theta1_fn=lambda x: x,
        params={"sigma": sigma},
    )


# ---------------------------------------------------------------------------
# equivalence ψ ~ h(t)·ψ


def equivalent(family: PsiFamily, h: Callable, label: str = "h") -> PsiFamily:
    """The family ``h(t)·ψ(x, t)`` for a positive ``h``; same estimators, same θ₁."""

    def psi(x, t):
        return h(t) * family.psi(x, t)

    return PsiFamily(
        name=f"{label}*{family.name}",
        psi=psi,
        theta=family.theta,
        continuous_in_t=family.continuous_in_t,
        strictly_decreasing_in_t=False,
        theta1_fn=family.theta1_fn,
        closed_form_fn=family.closed_form_fn,
        x_domain=family.x_domain,
        x_support=family.x_support,
        params=dict(family.params),
        decreasing_up_to_equivalence=(family.strictly_decreasing_in_t
                                      or family.decreasing_up_to_equivalence),
        point_check=family.point_check,
    )


def table_family(name: str, psi: Callable, support, theta: OpenInterval = R,
                 theta1: Optional[Mapping] = None, continuous: bool = False,
                 decreasing: bool = False) -> PsiFamily:
    """A family on a finite sample space given by explicit case tables."""
    lookup = dict(theta1) if theta1 is not None else None
    return PsiFamily(
        name=name,
        psi=psi,
        theta=theta,
        continuous_in_t=continuous,
        strictly_decreasing_in_t=decreasing,
        theta1_fn=(lambda x: lookup[float(x)]) if lookup is not None else None,
        x_support=frozenset(float(s) for s in support),
    )


# ---------------------------------------------------------------------------
# θ₁ and the textual spec grammar  tag[:subtag][:k=v{,k=v}]


def theta1(family: PsiFamily, x: float) -> float:
    if family.theta1_fn is None:
        raise NoAnalyticTheta1(f"{family.name} has no analytic theta1")
    family.check_points([x])
    return float(family.theta1_fn(x))


@dataclass(frozen=True)
class FamilySpec:
    tag: str
    subtag: Optional[str] = None
    params: Mapping = field(default_factory=dict)


def parse_family_spec(text: str) -> FamilySpec:
    parts = [p.strip() for p in text.strip().split(":")]
    if not parts or not parts[0]:
        raise InvalidParameter("empty family spec")
    tag = parts[0]
    params = {}
    subtag = None
    for part in parts[1:]:
        if "=" in part:
            for item in part.split(","):
                if not item:
                    continue
                if "=" not in item:
                    raise InvalidParameter(f"malformed parameter {item!r} in {text!r}")
                k, v = item.split("=", 1)
                params[k.strip()] = v.strip()
        elif subtag is None and part:
            subtag = part
        else:
            raise InvalidParameter(f"unexpected segment {part!r} in {text!r}")
    return FamilySpec(tag, subtag, params)


def _num(params, key, default=None, cast=float):
    if key not in params:
        if default is None:
            raise InvalidParameter(f"missing parameter {key!r}")
        return default
    try:
        return cast(params[key])
    except ValueError:
        raise InvalidParameter(f"parameter {key}={params[key]!r} is not a number") from None


def _reject_unknown(params, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise InvalidParameter(f"unknown parameter(s): {', '.join(sorted(extra))}")


def make_family(spec) -> PsiFamily:
    """Build a family from a ``FamilySpec`` or its textual form (``"quantile:alpha=0.3"``)."""
    if isinstance(spec, str):
        spec = parse_family_spec(spec)
    tag, sub, params = spec.tag, spec.subtag, dict(spec.params)
    if tag == "median":
        _reject_unknown(params, ())
        return median()
    if tag == "quantile":
        _reject_unknown(params, ("alpha",))
        return quantile(_num(params, "alpha"))
    if tag == "expectile":
        _reject_unknown(params, ("alpha",))
        return expectile(_num(params, "alpha"))
    if tag == "mathieu":
        if sub is None:
            raise InvalidParameter("mathieu needs a profile, e.g. mathieu:huber:beta=1")
        allowed = {"huber": ("beta",), "catoni": ("b",), "poly": ("p", "beta"),
                   "catoni2": ("alpha",), "l1l2": (), "fair": ()}
        if sub not in allowed:
            raise InvalidParameter(f"unknown Mathieu profile {sub!r}")
        _reject_unknown(params, allowed[sub])
        return mathieu(MathieuSpec(
            sub,
            beta=_num(params, "beta", 1.0),
            b=_num(params, "b", 1.0),
            p=_num(params, "p", 1, cast=int),
            alpha=_num(params, "alpha", 1.5),
        ))
    if tag == "bajraktarevic":
        _reject_unknown(params, ("p", "phi"))
        return bajraktarevic_builtin(sub or "id", params.get("p", "one"), params.get("phi", "f"))
    if tag == "normal-mean":
        _reject_unknown(params, ("sigma",))
        return normal_mean(_num(params, "sigma", 1.0))
    if tag == "normal-var":
        _reject_unknown(params, ("m", "form"))
        return normal_var(_num(params, "m", 0.0), params.get("form", "rescaled"))
    if tag == "ism":
        _reject_unknown(params, ())
        return ism()
    if tag == "normal-mixture":
        _reject_unknown(params, ("sigma",))
        return normal_mixture(_num(params, "sigma", 1.0))
    raise InvalidParameter(f"unknown family {tag!r}")


CATALOG = (
    ("median", "sign(x - t); X = Θ = R"),
    ("quantile:alpha=A", "alpha if x > t, 0 if x = t, alpha - 1 if x < t; A in (0, 1)"),
    ("expectile:alpha=A", "alpha (x - t) if x > t, (1 - alpha)(x - t) otherwise; A in (0, 1)"),
    ("mathieu:huber:beta=B", "sign(x - t) min(|x - t|, B); B > 0"),
    ("mathieu:catoni:b=B", "sign(x - t) ln(1 + z/B + z^2/(2B^2)), z = |x - t|; B > 0"),
    ("mathieu:poly:p=P,beta=B", "sign(x - t) z / (1 + (z/B)^(1 - 1/P)); P in N, B > 0"),
    ("mathieu:catoni2:alpha=A", "sign(x - t) ln(1 + z + z^A/A); A in (1, 2)"),
    ("mathieu:l1l2", "(x - t) / sqrt(1 + (x - t)^2/2)"),
    ("mathieu:fair", "(x - t) / (1 + |x - t|)"),
    ("bajraktarevic:F[:p=P,phi=G]",
     "p(x)(phi(x) - F(t)); F, G in {" + ", ".join(BUILTIN_MONOTONE) + "}, "
     "P in {" + ", ".join(P_WEIGHTS) + "}; defaults p=one, phi=f"),
    ("normal-mean:sigma=S", "(x - m)/S^2, Θ = R"),
    ("normal-var:m=M[,form=raw]", "(x - M)^2 - s (raw: divided by 2 s^2), Θ = (0, inf)"),
    ("ism", "1/alpha + ln(1 - x^2), X = (0, 1), Θ = (0, inf)"),
    ("normal-mixture:sigma=S", "score in m of 1/2 N(0,1) + 1/2 N(m, S^2)"),
)

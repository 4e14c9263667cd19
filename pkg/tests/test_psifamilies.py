import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psisolve.core import DomainError, InvalidParameter
from psisolve.psifamilies import (
    CATALOG,
    MathieuSpec,
    NoAnalyticTheta1,
    eval_f_mathieu,
    make_family,
    parse_family_spec,
    table_family,
    theta1,
)

SPECS = [
    "median", "quantile:alpha=0.3", "expectile:alpha=0.7", "mathieu:huber:beta=1",
    "mathieu:catoni:b=2", "mathieu:poly:p=2,beta=1", "mathieu:catoni2:alpha=1.5",
    "mathieu:l1l2", "mathieu:fair", "bajraktarevic:id", "bajraktarevic:cube:p=absphi1",
    "bajraktarevic:exp:p=abs1", "bajraktarevic:jump", "normal-mean:sigma=1", "normal-var:m=0",
    "normal-var:m=1,form=raw", "ism", "normal-mixture:sigma=1",
]

STRICT = {
    "median": False, "quantile:alpha=0.3": False, "expectile:alpha=0.7": True,
    "mathieu:huber:beta=1": False, "mathieu:catoni:b=2": True, "mathieu:poly:p=2,beta=1": True,
    "mathieu:catoni2:alpha=1.5": True, "mathieu:l1l2": True, "mathieu:fair": True,
    "bajraktarevic:id": True, "normal-mean:sigma=1": True, "normal-var:m=0": True, "ism": True,
    "normal-mixture:sigma=1": False,
}


# ---- frozen oracles ------------------------------------------------------

def test_quantile_values():
    q = make_family("quantile:alpha=0.3")
    assert q(5, 2) == 0.3 and q(1, 2) == pytest.approx(-0.7) and q(2, 2) == 0.0


def test_huber_values():
    h = make_family("mathieu:huber:beta=1")
    assert h(0, 0.5) == -0.5 and h(0, 3) == -1.0 and h(1, 1) == 0.0


def test_symmetric_expectile():
    e = make_family("expectile:alpha=0.5")
    for x, t in [(3.0, 1.0), (-1.0, 2.0)]:
        assert e(x, t) == (x - t) / 2


@pytest.mark.parametrize("spec, z, expected", [
    (MathieuSpec("huber", beta=1.0), 2.0, 1.0),
    (MathieuSpec("l1l2"), 0.0, 0.0),
    (MathieuSpec("fair"), 1.0, 0.5),
    (MathieuSpec("catoni", b=2.0), 2.0, math.log(2.5)),
    (MathieuSpec("poly", p=2, beta=1.0), 4.0, 4.0 / 3.0),
    (MathieuSpec("catoni2", alpha=1.5), 1.0, math.log(1 + 1 + 1 / 1.5)),
    (MathieuSpec("l1l2"), 2.0, 2.0 / math.sqrt(3.0)),
])
def test_mathieu_profiles(spec, z, expected):
    assert eval_f_mathieu(spec, z) == pytest.approx(expected, rel=1e-14)


def test_catoni_large_argument_is_finite():
    assert eval_f_mathieu(MathieuSpec("catoni"), 1e200) == pytest.approx(2 * math.log(1e200) - math.log(2))


def test_theta1_values():
    assert theta1(make_family("ism"), 0.5) == pytest.approx(-1 / math.log(0.75))
    assert theta1(make_family("ism"), 0.5) == pytest.approx(3.476059, abs=1e-6)
    assert make_family("ism")(0.5, theta1(make_family("ism"), 0.5)) == pytest.approx(0, abs=1e-15)
    assert theta1(make_family("normal-var:m=0"), 2.0) == 4.0
    assert theta1(make_family("median"), 7.0) == 7.0
    assert theta1(make_family("bajraktarevic:cube:phi=id"), 8.0) == pytest.approx(2.0)


def test_no_analytic_theta1():
    fam = table_family("t", lambda x, t: x - t, support=(1, 2))
    with pytest.raises(NoAnalyticTheta1):
        theta1(fam, 1.0)


def test_ism_domain():
    fam = make_family("ism")
    with pytest.raises(DomainError):
        fam.check_points([0.5, 1.0])
    with pytest.raises(DomainError):
        theta1(fam, -0.2)


def test_normal_var_excludes_m():
    with pytest.raises(DomainError):
        make_family("normal-var:m=1").check_points([1.0])


def test_bajraktarevic_phi_outside_hull():
    fam = make_family("bajraktarevic:l1l2:phi=id")
    fam.check_points([0.5, -1.0])
    with pytest.raises(DomainError):
        fam.check_points([2.0])


@pytest.mark.parametrize("text", [
    "bogus", "quantile", "quantile:alpha=1.5", "quantile:alpha=x", "expectile:alpha=0",
    "mathieu", "mathieu:huber:beta=-1", "mathieu:poly:p=0", "mathieu:catoni2:alpha=2.5",
    "mathieu:weird", "normal-mean:sigma=0", "median:alpha=0.3", "bajraktarevic:sin",
    "bajraktarevic:id:p=two", "normal-var:form=cooked", "normal-mixture:sigma=-1",
])
def test_invalid_specs(text):
    with pytest.raises(InvalidParameter):
        make_family(text)


def test_parse_grammar():
    s = parse_family_spec("mathieu:poly:p=2,beta=0.5")
    assert s.tag == "mathieu" and s.subtag == "poly" and dict(s.params) == {"p": "2", "beta": "0.5"}
    assert parse_family_spec("median").subtag is None


def test_catalog_specs_parse():
    for spec, _ in CATALOG:
        assert spec.split(":")[0] in {"median", "quantile", "expectile", "mathieu", "bajraktarevic",
                                      "normal-mean", "normal-var", "ism", "normal-mixture"}


@pytest.mark.parametrize("spec, flag", sorted(STRICT.items()))
def test_strict_flags(spec, flag):
    fam = make_family(spec)
    assert fam.strictly_decreasing_in_t == flag or (spec == "normal-var:m=0" and fam.decreasing_up_to_equivalence)
    assert fam.has_theta1


# ---- properties ------------------------------------------------------------

def _sample_x(fam, rng, k):
    if fam.x_domain is not None:
        return rng.uniform(0.02, 0.98, k)
    return rng.uniform(-10, 10, k)


@pytest.mark.parametrize("spec", SPECS)
def test_T1_on_grid(spec):
    fam = make_family(spec)
    rng = np.random.default_rng(11)
    for x in _sample_x(fam, rng, 64):
        th = theta1(fam, x)
        scale = max(1.0, abs(th))
        deltas = scale * np.geomspace(1e-6, 2.0, 24)
        left = th - deltas
        right = th + deltas
        left = left[[t in fam.theta for t in left]]
        right = right[[t in fam.theta for t in right]]
        assert np.all(fam(x, left) > 0), (x, th)
        assert np.all(fam(x, right) < 0), (x, th)


@pytest.mark.parametrize("spec", [s for s in SPECS if make_family(s).strictly_decreasing_in_t])
def test_strict_decrease_honesty(spec):
    fam = make_family(spec)
    rng = np.random.default_rng(5)
    xs = _sample_x(fam, rng, 64)
    for x in xs:
        th = theta1(fam, x)
        t1, t2 = np.sort(th + max(1.0, abs(th)) * rng.uniform(-3, 3, 2))
        if t1 == t2 or t1 not in fam.theta or t2 not in fam.theta:
            continue
        assert fam(x, t1) > fam(x, t2)


@pytest.mark.parametrize("spec", [s for s in SPECS if s.startswith("mathieu") or s == "median"])
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_odd_symmetry(spec, x, t):
    fam = make_family(spec)
    assert fam(x, t) == -fam(t, x)


def test_broadcasting():
    fam = make_family("expectile:alpha=0.2")
    out = fam(np.array([[0.0], [1.0]]), np.array([[0.5, 1.5]]))
    assert out.shape == (2, 2)


def test_mixture_is_stable_far_out():
    fam = make_family("normal-mixture:sigma=1")
    v = fam(np.array([40.0, -40.0, 0.0]), np.array([0.0, 0.0, 40.0]))
    assert np.all(np.isfinite(v))

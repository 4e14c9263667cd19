import numpy as np
import pytest
from hypothesis import given, strategies as st

from psisolve.core import OpenInterval, validate_weighted_sample
from psisolve.psifamilies import make_family
from psisolve.verify import (
    HOLDS,
    INCONCLUSIVE,
    VERDICTS,
    VIOLATED,
    PropertyReport,
    RatioFunction,
    Theta1Order,
    UnknownId,
    check_eps_increasing,
    check_level_of_increase,
    check_levels_for_Tn,
    check_ratio_monotone,
    check_Tn_lambda,
    classify_piecewise,
    random_corpus,
    reproduce,
    reproduce_all,
)

U = OpenInterval(0.0, 1.0)


def const(c):
    return lambda t: np.full_like(np.asarray(t, dtype=float), c)


# ---- frozen oracles ------------------------------------------------------

def test_level_identity_case_iii():
    r = check_level_of_increase(lambda t: t, U, 0.5, 64)
    assert r.verdict == HOLDS and r.details["case"] == "iii"


def test_level_cases_i_ii():
    assert check_level_of_increase(lambda t: t, U, -1.0, 64).details["case"] == "i"
    assert check_level_of_increase(lambda t: t, U, 2.0, 64).details["case"] == "ii"


def test_level_decreasing_violated():
    r = check_level_of_increase(lambda t: -t, U, -0.5, 64)
    assert r.verdict == VIOLATED
    u, v = r.witnesses[0]
    assert u < v and -u >= -0.5 >= -v


def test_level_constant_at_its_value_is_violated():
    # y <= f(u) but not y < f(v): a constant is never a level of increase at its own value
    r = check_level_of_increase(const(0.5), U, 0.5, 64)
    assert r.verdict == VIOLATED


def test_level_near_ties_inconclusive():
    r = check_level_of_increase(lambda t: 0.5 + 1e-17 * np.sin(40 * np.asarray(t)) + 1e-16, U, 0.5, 64)
    assert r.verdict in (INCONCLUSIVE, HOLDS)
    r = check_level_of_increase(lambda t: 1.0 - 1e-14 * np.asarray(t), U, 1.0 - 2e-14, 64)
    assert r.verdict == INCONCLUSIVE


def test_eps_increasing_examples():
    assert check_eps_increasing(const(0.5), U, 1 / 3, True, 64).verdict == HOLDS
    r = check_eps_increasing(lambda t: -np.asarray(t), U, 0.5, True, 64)
    assert r.verdict == VIOLATED
    u, v = r.witnesses[0]
    assert -u >= -v + 0.5
    for eps in (0.0, 0.1, 10.0):
        assert check_eps_increasing(lambda t: t, U, eps, True, 64).verdict == HOLDS


def test_ratio_examples():
    assert check_ratio_monotone(make_family("expectile:alpha=0.3"), 0, 1).verdict == HOLDS
    r = check_ratio_monotone(make_family("normal-mixture:sigma=1"), 1, 5, strict=False)
    assert r.verdict == VIOLATED and all(1 < u < v < 5 for u, v in r.witnesses)
    assert check_ratio_monotone(make_family("median"), 0, 1, strict=True).verdict == VIOLATED
    assert check_ratio_monotone(make_family("median"), 0, 1, strict=False).verdict == HOLDS


def test_ratio_order_error():
    with pytest.raises(Theta1Order):
        RatioFunction(make_family("median"), 2, 1)
    with pytest.raises(Theta1Order):
        check_levels_for_Tn(make_family("median"), 1, 1, 2)


def test_ratio_values():
    r = RatioFunction(make_family("quantile:alpha=0.3"), 0, 1)
    assert r(0.5) == pytest.approx(7 / 3)
    share = RatioFunction(make_family("median"), 0, 1, variant="share")
    assert share(0.5) == 0.5


def test_levels_examples():
    assert check_levels_for_Tn(make_family("quantile:alpha=0.5"), 0, 1, 2).verdict == VIOLATED
    assert check_levels_for_Tn(make_family("quantile:alpha=0.3"), 0, 1, 2).verdict == HOLDS
    r = check_levels_for_Tn(make_family("expectile:alpha=0.3"), 0, 1, 5)
    assert r.verdict == HOLDS and len(r.details["levels"]) == 4


def test_tn_lambda_examples():
    huber = make_family("mathieu:huber:beta=1")
    r = check_Tn_lambda(huber, [validate_weighted_sample([0, 3])])
    assert r.verdict == VIOLATED and r.witnesses[0]["points"] == [0.0, 3.0]
    catoni = make_family("mathieu:catoni:b=1")
    assert check_Tn_lambda(catoni, random_corpus(catoni, 100, n_max=7)).verdict == HOLDS
    baj = make_family("bajraktarevic:id")
    assert check_Tn_lambda(baj, random_corpus(baj, 30)).verdict == HOLDS


def test_parallel_map_matches_sequential():
    fam = make_family("quantile:alpha=0.5")
    corpus = random_corpus(fam, 40, n_max=6, unit_weights=True, seed=3)
    a = check_Tn_lambda(fam, corpus)
    b = check_Tn_lambda(fam, corpus, workers=4)
    assert a == b and a.verdict == VIOLATED


def test_report_invariants():
    with pytest.raises(ValueError):
        PropertyReport("x", VIOLATED)
    with pytest.raises(ValueError):
        PropertyReport("x", "proved")
    assert "proved" not in VERDICTS


def test_classify_piecewise():
    assert classify_piecewise(lambda t: 1.0 if t < 1 else -1.0, [1])["kind"] == "Point"
    assert classify_piecewise(lambda t: 1.0 if t < 1 else (0.0 if t < 2 else -1.0), [1, 2])["kind"] == "ZeroPlateau"
    assert classify_piecewise(lambda t: -1.0 if t < 1 else 1.0, [1])["kind"] == "NotDecreasingType"


# ---- reproductions ---------------------------------------------------------

@pytest.mark.parametrize("name", ["ex-T2-fail", "ex-not-omitted", "ex-div-noomit", "huber-T2",
                                  "median-even", "mixture-ratio"])
def test_reproductions_match(name):
    r = reproduce(name)
    assert r.details["match"] is True
    assert "expected" in r.details and "computed" in r.details


def test_t2_branches():
    r = reproduce("ex-T2-fail", w=(1.0, 2.0))
    assert r.details["cases"][0]["theta2"]["1,2"] == 2.0 and r.details["computed"] == ["T2 holds"]
    r = reproduce("ex-T2-fail", w=(1.0, 1.0))
    assert r.details["computed"] == ["T2 fails"] and r.details["match"]
    r = reproduce("ex-T2-fail", w=(3.0, 1.0, 2.0))
    assert r.details["match"] and r.details["cases"][0]["theta2"]["2,3"] == 3.0


def test_not_omitted_zeros():
    r = reproduce("ex-not-omitted")
    assert r.details["computed"]["zeros"] == [1.0, 2.0]
    assert r.details["computed"]["kind"] != "Point"


def test_unknown_id():
    with pytest.raises(UnknownId):
        reproduce("ex-nope")


def test_reproduce_all_deterministic():
    a = [r.to_dict() for r in reproduce_all(seed=7)]
    b = [r.to_dict() for r in reproduce_all(seed=7)]
    assert a == b and all(d["details"]["match"] for d in a)


# ---- properties ------------------------------------------------------------

@given(st.lists(st.floats(-5, 5), min_size=16, max_size=40), st.floats(-5, 5))
def test_level_violation_witness_sound(values, y):
    arr = np.array(values)
    ts = U.grid(len(values))
    f = lambda t: np.interp(t, ts, arr)
    r = check_level_of_increase(f, U, y, len(values))
    if r.verdict == VIOLATED:
        u, v = r.witnesses[0]
        assert u < v and f(u) >= y >= f(v)


@given(st.lists(st.floats(-5, 5), min_size=16, max_size=40), st.floats(0, 2))
def test_eps_violation_witness_sound(values, eps):
    arr = np.array(values)
    ts = U.grid(len(values))
    f = lambda t: np.interp(t, ts, arr)
    r = check_eps_increasing(f, U, eps, True, len(values))
    if r.verdict == VIOLATED:
        u, v = r.witnesses[0]
        fu, fv = f(u), f(v)
        assert u < v and fu >= fv + eps - 1e-13 * max(1.0, abs(fu))
        if fu - fv - eps > 1e-12:
            assert r.margin <= -1e-12


@given(st.floats(0.01, 0.99).filter(lambda a: all(abs(2 * a - k) > 1e-9 for k in range(1, 2))))
def test_quantile_share_is_strictly_half_increasing(alpha):
    fam = make_family(f"quantile:alpha={alpha!r}")
    share = RatioFunction(fam, 0.0, 1.0, variant="share")
    assert check_eps_increasing(share, share.domain, 0.5, True, 64).verdict == HOLDS


def test_theorem_coherence_quantile_and_huber():
    # T_2 refuted by the solver, so the levels check must not pass on the same pair
    q = make_family("quantile:alpha=0.5")
    assert check_Tn_lambda(q, [validate_weighted_sample([0, 1])]).verdict == VIOLATED
    assert check_levels_for_Tn(q, 0, 1, 2).verdict in (VIOLATED, INCONCLUSIVE)
    h = make_family("mathieu:huber:beta=1")
    assert check_Tn_lambda(h, [validate_weighted_sample([0, 3])]).verdict == VIOLATED
    assert check_levels_for_Tn(h, 0, 3, 2).verdict in (VIOLATED, INCONCLUSIVE)

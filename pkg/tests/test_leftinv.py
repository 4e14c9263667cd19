import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psisolve.core import OpenInterval
from psisolve.leftinv import (
    MonotoneFunction,
    NotIncreasing,
    OutOfHull,
    builtin_monotone,
    generalized_left_inverse,
    range_hull,
)
from psisolve.signchange import SolverOptions

TOL = SolverOptions().tolerance


@pytest.mark.parametrize("analytic", [True, False])
def test_oracles(analytic):
    assert generalized_left_inverse(builtin_monotone("id", analytic), 0.7) == pytest.approx(0.7, abs=TOL)
    assert generalized_left_inverse(builtin_monotone("jump", analytic), 0.5) == pytest.approx(0.0, abs=TOL)
    assert generalized_left_inverse(builtin_monotone("cube", analytic), 8.0) == pytest.approx(2.0, abs=TOL)


@pytest.mark.parametrize("analytic", [True, False])
def test_hulls(analytic):
    h = range_hull(builtin_monotone("id", analytic))
    assert h.lower is None and h.upper is None
    h = range_hull(builtin_monotone("l1l2", analytic))
    assert h.lower == pytest.approx(-math.sqrt(2), abs=1e-12)
    assert h.upper == pytest.approx(math.sqrt(2), abs=1e-12)
    h = range_hull(builtin_monotone("exp", analytic))
    assert h.lower == 0.0 and h.upper is None


def test_out_of_hull():
    f = builtin_monotone("exp")
    with pytest.raises(OutOfHull):
        generalized_left_inverse(f, 0.0)  # open endpoint
    with pytest.raises(OutOfHull):
        generalized_left_inverse(f, -1.0)
    with pytest.raises(OutOfHull):
        generalized_left_inverse(builtin_monotone("l1l2"), 1.5)


def test_not_increasing_rejected():
    with pytest.raises(NotIncreasing):
        MonotoneFunction(lambda t: -np.asarray(t))
    with pytest.raises(NotIncreasing):
        MonotoneFunction(lambda t: np.floor(np.asarray(t)))


def test_scalar_only_callable():
    f = MonotoneFunction(lambda t: math.atan(t), name="atan")
    assert range_hull(f).upper == pytest.approx(math.pi / 2)
    assert generalized_left_inverse(f, 1.0) == pytest.approx(math.tan(1.0), abs=1e-9)


def test_bounded_domain_numeric():
    f = MonotoneFunction(np.log, OpenInterval(0.0, 1.0), name="log01")
    h = range_hull(f)
    assert h.lower is None and h.upper == pytest.approx(0.0, abs=1e-15)
    assert generalized_left_inverse(f, -2.0) == pytest.approx(math.exp(-2.0), abs=TOL)


@pytest.mark.parametrize("name", ["id", "cube", "jump", "exp", "log", "l1l2"])
@pytest.mark.parametrize("analytic", [True, False])
@given(u=st.floats(0.02, 0.98))
def test_left_inverse_identity(name, analytic, u):
    f = builtin_monotone(name, analytic)
    t = float(f.domain.grid(1, scale=4.0)[0]) if False else _point(f.domain, u)
    y = float(f(t))
    if y not in range_hull(f):
        return
    assert abs(generalized_left_inverse(f, y) - t) <= 10 * TOL * max(1.0, abs(t))


def _point(domain, u):
    if domain.lower is not None and domain.upper is not None:
        return domain.lower + (domain.upper - domain.lower) * u
    if domain.lower is not None:
        return domain.lower + 20.0 * u
    return -10.0 + 20.0 * u


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_monotone_in_y(y1, y2):
    f = builtin_monotone("jump", analytic=False)
    lo, hi = sorted((y1, y2))
    assert generalized_left_inverse(f, lo) <= generalized_left_inverse(f, hi) + TOL


@given(st.floats(-1.4, 1.4))
def test_right_identity_continuous(y):
    f = builtin_monotone("l1l2", analytic=False)
    assert abs(f(generalized_left_inverse(f, y)) - y) <= 10 * TOL

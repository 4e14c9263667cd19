import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psisolve.core import (
    AllWeightsZero,
    DiscreteDistribution,
    EmptyInterval,
    InvalidDistribution,
    InvalidParameter,
    LengthMismatch,
    NaNInput,
    NegativeWeight,
    OpenInterval,
    OutcomeKind,
    SignChangeOutcome,
    WeightedSample,
    validate_weighted_sample,
)


def test_unit_weights_sample():
    s = validate_weighted_sample([1, 2], [1, 1])
    assert s.n == 2 and s.points == (1.0, 2.0) and s.weights == (1.0, 1.0)


def test_all_zero_weights_rejected():
    with pytest.raises(AllWeightsZero):
        validate_weighted_sample([1, 2], [0, 0])


def test_singleton_sample():
    s = validate_weighted_sample([1], [3])
    assert s.n == 1 and s.weights == (3.0,)


def test_default_weights_are_ones():
    assert validate_weighted_sample([4, 5, 6]).weights == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("points, weights, error", [
    ([1, 2], [1], LengthMismatch),
    ([], [], LengthMismatch),
    ([1, 2], [1, -1], NegativeWeight),
    ([1, float("nan")], [1, 1], NaNInput),
    ([1, 2], [1, float("nan")], NaNInput),
    ([1, float("inf")], [1, 1], NaNInput),
])
def test_invalid_samples(points, weights, error):
    with pytest.raises(error):
        validate_weighted_sample(points, weights)


def test_direct_construction_validates():
    with pytest.raises(AllWeightsZero):
        WeightedSample((1.0,), (0.0,))


def test_sample_equality_is_order_sensitive():
    a = validate_weighted_sample([1, 2], [1, 3])
    assert a == validate_weighted_sample([1, 2], [1, 3])
    assert a != validate_weighted_sample([2, 1], [3, 1])
    assert a.permuted([1, 0]) == validate_weighted_sample([2, 1], [3, 1])


def test_interval_membership_is_strict():
    i = OpenInterval(0.0, 1.0)
    assert 0.5 in i
    assert 0.0 not in i and 1.0 not in i
    assert float("nan") not in i
    r = OpenInterval.real_line()
    assert 1e300 in r and math.inf not in r


@pytest.mark.parametrize("lo, hi", [(1.0, 1.0), (2.0, 1.0)])
def test_degenerate_interval(lo, hi):
    with pytest.raises(EmptyInterval):
        OpenInterval(lo, hi)


def test_infinite_endpoint_must_be_none():
    with pytest.raises(InvalidParameter):
        OpenInterval(-math.inf, 0.0)


@pytest.mark.parametrize("interval", [
    OpenInterval(), OpenInterval(0.0, None), OpenInterval(None, 3.0), OpenInterval(-2.0, 5.0),
])
def test_grid_is_inside_and_increasing(interval):
    g = interval.grid(257)
    assert g.size > 200
    assert np.all(np.diff(g) > 0)
    assert interval.contains_all(g)
    assert interval.center() in interval


def test_clip_inside():
    i = OpenInterval(0.0, 1.0)
    assert 0.0 < i.clip_inside(0.0) < 1e-300
    assert i.clip_inside(1.0) < 1.0
    assert i.clip_inside(0.25) == 0.25


def test_distribution_validation():
    d = DiscreteDistribution([0, 1], [0.5, 0.5])
    assert d.as_sample().weights == (0.5, 0.5)
    with pytest.raises(InvalidDistribution):
        DiscreteDistribution([0, 1], [0.5, 0.6])
    with pytest.raises(InvalidDistribution):
        DiscreteDistribution([1, 1], [0.5, 0.5])
    with pytest.raises(InvalidDistribution):
        DiscreteDistribution([0, 1], [1.5, -0.5])
    # within 1e-12 is accepted as is
    DiscreteDistribution([0, 1, 2], [0.1, 0.2, 0.7 + 5e-13])


def test_outcome_dict():
    o = SignChangeOutcome(OutcomeKind.POINT, location=2.0, bracket=(1.9, 2.1))
    d = o.to_dict()
    assert d["kind"] == "Point" and d["bracket"] == [1.9, 2.1] and d["plateau"] is None
    assert o.is_point


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(st.tuples(finite, st.floats(0, 1e3)), min_size=1, max_size=20))
def test_sample_roundtrip_or_all_zero(pairs):
    pts = [p for p, _ in pairs]
    wts = [w for _, w in pairs]
    if all(w == 0 for w in wts):
        with pytest.raises(AllWeightsZero):
            validate_weighted_sample(pts, wts)
    else:
        s = validate_weighted_sample(pts, wts)
        assert s.points == tuple(pts) and s.weights == tuple(wts)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsgronwall.errors import BadParameter, NonMonotonic, NotInScale, TooFewPoints
from tsgronwall.timescale import TimeScale, jump, make_scale, refine


def test_integers():
    assert list(make_scale({"kind": "integers", "lo": 0, "hi": 3})) == [0, 1, 2, 3]


def test_uniform_includes_both_endpoints():
    assert list(make_scale({"kind": "uniform", "start": 0, "stop": 1, "n": 4})) == [
        0, 0.25, 0.5, 0.75, 1]


def test_q_scale():
    assert list(make_scale({"kind": "q_scale", "q": 2, "t0": 1, "n": 3})) == [1, 2, 4, 8]


@pytest.mark.parametrize("spec, exc", [
    ({"kind": "explicit", "points": [0, 2, 1]}, NonMonotonic),
    ({"kind": "explicit", "points": [0, 1, 1]}, NonMonotonic),
    ({"kind": "explicit", "points": [0, 1, 1 + 1e-13]}, NonMonotonic),
    ({"kind": "explicit", "points": [0]}, TooFewPoints),
    ({"kind": "q_scale", "q": 1, "t0": 1, "n": 3}, BadParameter),
    ({"kind": "q_scale", "q": 0.5, "t0": 1, "n": 3}, BadParameter),
    ({"kind": "uniform", "start": 0, "stop": 1, "n": 0}, BadParameter),
    ({"kind": "uniform", "start": 1, "stop": 1, "n": 2}, BadParameter),
    ({"kind": "integers", "lo": 3, "hi": 3}, BadParameter),
    ({"kind": "comb"}, BadParameter),
])
def test_make_scale_rejects(spec, exc):
    with pytest.raises(exc):
        make_scale(spec)


def test_jump_interior_and_max():
    ts = TimeScale.explicit([0, 1, 3])
    assert jump(ts, 1) == (3, 0, 2)
    assert jump(ts, 3) == (3, 1, 0)
    assert jump(ts, 0) == (1, 0, 1)


def test_jump_q_scale():
    assert jump(TimeScale.q_scale(2, 1, 3), 2) == (4, 1, 2)


def test_jump_tolerant_lookup_and_absent_points():
    ts = TimeScale.explicit([0, 1, 3])
    assert jump(ts, 1 + 5e-13) == (3, 0, 2)
    with pytest.raises(NotInScale):
        jump(ts, 2)
    with pytest.raises(NotInScale):
        jump(ts, 1 + 1e-9)


def test_refine():
    assert list(refine(TimeScale.explicit([0, 1]), 2)) == [0, 0.5, 1]
    assert list(refine(TimeScale.explicit([0, 2]), 4)) == [0, 0.5, 1, 1.5, 2]
    ts = TimeScale.explicit([0, 1, 3])
    assert refine(ts, 1) == ts
    with pytest.raises(BadParameter):
        refine(ts, 0)


def test_refine_composes_exactly_on_uniform_scales():
    ts = TimeScale.uniform(0, 1, 3)
    assert refine(refine(ts, 2), 3) == refine(ts, 6)


point_lists = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=15, unique=True)


def _scale(pts):
    pts = sorted(pts)
    if min(np.diff(pts)) < 1e-6:
        pts = [k * 0.5 for k in range(len(pts))]
    return TimeScale.explicit(pts)


@given(point_lists)
def test_sigma_rho_are_inverse_on_interior_points(pts):
    ts = _scale(pts)
    for t in list(ts)[1:-1]:
        assert ts.rho(ts.sigma(t)) == t
        assert ts.sigma(ts.rho(t)) == t


@given(point_lists)
def test_graininess_sums_to_span(pts):
    ts = _scale(pts)
    assert ts.mu[-1] == 0
    assert np.all(ts.mu[:-1] > 0)
    assert np.isclose(ts.mu.sum(), ts.max - ts.min, rtol=1e-12, atol=1e-12)


@given(point_lists, st.integers(1, 4), st.integers(1, 4))
def test_refine_composition(pts, a, b):
    ts = _scale(pts)
    lhs, rhs = refine(refine(ts, a), b), refine(ts, a * b)
    assert len(lhs) == len(rhs)
    np.testing.assert_allclose(lhs.points, rhs.points, rtol=0, atol=1e-12 * max(1, abs(ts.max)))


def test_spec_round_trip():
    for ts in (TimeScale.integers(-1, 4), TimeScale.uniform(0, 2, 5),
               TimeScale.q_scale(1.5, 0.5, 4), TimeScale.explicit([0, 0.3, 2])):
        assert make_scale(ts.to_spec()) == ts

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import brute
from tsgronwall.errors import EvaluationError, ShapeMismatch
from tsgronwall.gridfun import (
    Domain3,
    GridFunction3,
    inner_double,
    inner_double_table,
    tabulate3,
    triple_cumulative,
    triple_cumulative_table,
)
from tsgronwall.timescale import TimeScale


def _dom(p1, p2, p3):
    return Domain3(TimeScale.explicit(p1), TimeScale.explicit(p2), TimeScale.explicit(p3))


def test_domain_origin_and_endpoints(worked):
    assert (worked.x0, worked.y0, worked.a, worked.b) == (0, 0, 0, 1)


def test_tabulate_constant_and_product():
    assert np.all(tabulate3(_dom([0, 1], [0, 1], [0, 1]), "1").values == 1)
    d = Domain3(TimeScale.explicit([0, 1]), TimeScale.explicit([0, 1]), TimeScale.explicit([0, 5]))
    g = tabulate3(d, "x*y")
    assert g.values[:, :, 0].tolist() == [[0, 0], [0, 1]]


def test_tabulate_rejects_source_variables(worked):
    with pytest.raises(EvaluationError, match="variable s unbound"):
        tabulate3(worked, "exp(-s)")


def test_table_shape_checked(worked):
    with pytest.raises(ShapeMismatch):
        tabulate3(worked, np.zeros((3, 3, 3)))
    assert tabulate3(worked, np.arange(18.0).reshape(3, 3, 2)).at(2, 2, 1) == 17


def test_triple_cumulative_examples(ones):
    assert triple_cumulative(ones, 2, 2) == 4
    assert triple_cumulative(ones, 0, 2) == 0
    assert triple_cumulative(ones, 2, 0) == 0
    d = _dom([0, 2], [0, 3], [0, 1])
    assert triple_cumulative(GridFunction3(d, 1.0), 2, 3) == 6


def test_inner_double_examples():
    d = _dom([0, 1], [0, 1, 2], [0, 1])
    assert inner_double(GridFunction3(d, 1.0), 0, 2) == 2
    assert inner_double(GridFunction3(d, 1.0), 1, 0) == 0
    d = _dom([0, 1], [0, 1], [0, 2, 5])
    assert inner_double(GridFunction3(d, 1.0), 0, 1) == 5


@st.composite
def random_grid(draw, lo=0.0):
    def pts(n):
        gaps = draw(st.lists(st.floats(0.05, 2), min_size=n - 1, max_size=n - 1))
        return np.concatenate([[0], np.cumsum(gaps)])
    n1, n2, n3 = (draw(st.integers(2, 6)) for _ in range(3))
    d = _dom(pts(n1), pts(n2), pts(n3))
    vals = draw(st.lists(st.floats(lo, 3), min_size=n1 * n2 * n3, max_size=n1 * n2 * n3))
    return GridFunction3(d, np.reshape(vals, (n1, n2, n3)))


@settings(max_examples=60, deadline=None)
@given(random_grid(lo=-3.0))
def test_tables_match_loop_oracle(f):
    d = f.domain
    P1, P2, P3 = (list(s) for s in (d.t1, d.t2, d.i))
    C = triple_cumulative_table(f).values
    Q = inner_double_table(f).values
    for i in range(len(P1)):
        for j in range(len(P2)):
            ref = brute.triple_sum(f.values, P1, P2, P3, i, j)
            assert np.isclose(C[i, j], ref, rtol=1e-12, atol=1e-12)
            assert np.isclose(triple_cumulative(f, P1[i], P2[j]), ref, rtol=1e-12, atol=1e-12)
            qref = brute.inner_sum(f.values, P2, P3, i, j)
            assert np.isclose(Q[i, j], qref, rtol=1e-12, atol=1e-12)
            assert np.isclose(inner_double(f, P1[i], P2[j]), qref, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(random_grid())
def test_triple_cumulative_monotone_for_nonnegative_data(f):
    C = triple_cumulative_table(f).values
    assert np.all(np.diff(C, axis=0) >= 0)
    assert np.all(np.diff(C, axis=1) >= 0)
    assert np.all(C[0, :] == 0) and np.all(C[:, 0] == 0)


@settings(max_examples=60, deadline=None)
@given(random_grid(lo=-3.0))
def test_triple_is_weighted_sum_of_inner(f):
    d = f.domain
    C = triple_cumulative_table(f).values
    Q = inner_double_table(f).values
    mu1 = d.t1.mu
    for i in range(len(d.t1)):
        for j in range(len(d.t2)):
            via_inner = sum(Q[l, j] * mu1[l] for l in range(i))
            scale = np.sum(np.abs(f.values) * d.weights()) + 1
            assert abs(C[i, j] - via_inner) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(random_grid(lo=-3.0), st.floats(-2, 2), st.floats(-2, 2))
def test_operators_are_linear(f, alpha, beta):
    g = GridFunction3(f.domain, np.flip(f.values))
    combo = alpha * f + beta * g
    scale = (abs(alpha) + abs(beta)) * (np.sum(np.abs(f.values) * f.domain.weights()) + 1)
    lhs = triple_cumulative_table(combo).values
    rhs = alpha * triple_cumulative_table(f).values + beta * triple_cumulative_table(g).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale
    lhs = inner_double_table(combo).values
    rhs = alpha * inner_double_table(f).values + beta * inner_double_table(g).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_grid_arithmetic_domain_check(worked):
    other = Domain3(TimeScale.integers(0, 3), worked.t2, worked.i)
    with pytest.raises(ShapeMismatch):
        GridFunction3(worked, 1.0) + GridFunction3(other, 1.0)

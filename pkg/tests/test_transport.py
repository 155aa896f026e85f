import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depcov import SampleError
from depcov.wasserstein import (
    EmpiricalMeasure,
    optimal_transport,
    product_measure,
    product_subadditivity_check,
    product_subadditivity_terms,
    quantize_measure,
    transport_cost,
    w_exact_1d,
    w_exact_discrete,
)


def _brute_assignment(p, a, b):
    # exhaustive search over permutations; optimal for equal-size uniform measures
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2) ** p
    n = len(a)
    return min(sum(cost[i, pi[i]] for i in range(n)) for pi in itertools.permutations(range(n))) / n


def _cdf_w1(xa, wa, xb, wb):
    # d_1 on the line equals the integral of |F_a - F_b|
    grid = np.sort(np.r_[xa, xb])
    fa = np.array([wa[xa <= t].sum() for t in grid[:-1]])
    fb = np.array([wb[xb <= t].sum() for t in grid[:-1]])
    return float(np.sum(np.abs(fa - fb) * np.diff(grid)))


def test_measure_validation():
    with pytest.raises(SampleError):
        EmpiricalMeasure([[0.0], [1.0]], [0.5, 0.6])
    with pytest.raises(SampleError):
        EmpiricalMeasure([[0.0], [1.0]], [1.5, -0.5])
    with pytest.raises(SampleError):
        EmpiricalMeasure([[np.nan]])
    assert EmpiricalMeasure([[0.0], [1.0]], [0.5, 0.5]).is_uniform
    assert not EmpiricalMeasure([[0.0], [1.0]], [0.25, 0.75]).is_uniform


def test_1d_examples():
    a = EmpiricalMeasure([0.0, 2.0])
    assert w_exact_1d(1, a, a) == 0.0
    assert w_exact_1d(1, a, EmpiricalMeasure([1.0, 3.0])) == 1.0
    for p in (1, 2, 3.5):
        assert w_exact_1d(p, EmpiricalMeasure([0.0]), EmpiricalMeasure([1.0])) == 1.0


def test_1d_guards():
    with pytest.raises(SampleError):
        w_exact_1d(1, EmpiricalMeasure([0.0]), EmpiricalMeasure([0.0, 1.0]))
    with pytest.raises(SampleError):
        w_exact_1d(1, EmpiricalMeasure([[0.0, 1.0]]), EmpiricalMeasure([[0.0, 1.0]]))


def test_2d_tie_example():
    a = EmpiricalMeasure([[0.0, 0.0], [1.0, 1.0]])
    b = EmpiricalMeasure([[0.0, 1.0], [1.0, 0.0]])
    assert w_exact_discrete(1, a, b) == pytest.approx(1.0, abs=1e-15)


def test_discrete_matches_1d():
    rng = np.random.default_rng(0)
    for p in (1, 2, 3):
        a, b = EmpiricalMeasure(rng.normal(size=20)), EmpiricalMeasure(rng.normal(size=20))
        assert abs(w_exact_discrete(p, a, b) - w_exact_1d(p, a, b)) <= 1e-10


def test_assignment_matches_brute_force():
    rng = np.random.default_rng(1)
    for p in (1, 2):
        a, b = rng.random((6, 2)), rng.random((6, 2))
        assert transport_cost(p, EmpiricalMeasure(a), EmpiricalMeasure(b)) == pytest.approx(
            _brute_assignment(p, a, b), rel=1e-12
        )


def test_lp_matches_cdf_formula():
    rng = np.random.default_rng(2)
    for _ in range(10):
        xa, xb = rng.normal(size=7), rng.normal(size=5)
        wa, wb = rng.dirichlet(np.ones(7)), rng.dirichlet(np.ones(5))
        got = transport_cost(1, EmpiricalMeasure(xa, wa), EmpiricalMeasure(xb, wb))
        assert got == pytest.approx(_cdf_w1(xa, wa, xb, wb), rel=1e-8, abs=1e-12)


def test_lp_plan_is_a_coupling():
    rng = np.random.default_rng(3)
    a = EmpiricalMeasure(rng.random((5, 2)), rng.dirichlet(np.ones(5)))
    b = EmpiricalMeasure(rng.random((8, 2)))
    sol = optimal_transport(2, a, b)
    np.testing.assert_allclose(sol.plan.sum(axis=1), a.weights, atol=1e-12)
    np.testing.assert_allclose(sol.plan.sum(axis=0), b.weights, atol=1e-12)
    assert sol.plan.min() >= -1e-15 and sol.duality_gap <= 1e-9


def test_size_guard():
    a = EmpiricalMeasure(np.zeros((300, 1)))
    b = EmpiricalMeasure(np.ones((300, 1)))
    with pytest.raises(SampleError, match="exceed"):
        w_exact_discrete(1, a, b)
    assert w_exact_discrete(1, a, b, max_atoms=600) == 1.0


def test_metric_axioms():
    rng = np.random.default_rng(4)
    for _ in range(100):
        a, b, c = (EmpiricalMeasure(rng.random((int(rng.integers(2, 7)), 2)), None) for _ in range(3))
        ab = w_exact_discrete(1, a, b)
        assert abs(ab - w_exact_discrete(1, b, a)) <= 1e-10
        assert ab <= w_exact_discrete(1, a, c) + w_exact_discrete(1, c, b) + 1e-10
    for _ in range(10):
        a = EmpiricalMeasure(rng.random((int(rng.integers(1, 9)), 3)), None)
        assert w_exact_discrete(2, a, a) == 0.0
        w = EmpiricalMeasure(a.atoms, rng.dirichlet(np.ones(a.size)))
        assert w_exact_discrete(2, w, w) == pytest.approx(0.0, abs=1e-12)


def test_product_measure_layout():
    a = EmpiricalMeasure([0.0, 1.0], [0.25, 0.75])
    b = EmpiricalMeasure([[5.0, 6.0]])
    ab = product_measure(a, b)
    np.testing.assert_array_equal(ab.atoms, [[0, 5, 6], [1, 5, 6]])
    np.testing.assert_array_equal(ab.weights, [0.25, 0.75])


def test_product_subadditivity_examples():
    one, zero = EmpiricalMeasure([1.0]), EmpiricalMeasure([0.0])
    lhs, rhs = product_subadditivity_terms(2, zero, one, zero, one)
    assert lhs == pytest.approx(2.0, abs=1e-12) and rhs == pytest.approx(2.0, abs=1e-12)
    assert product_subadditivity_check(2, zero, one, zero, one)
    rng = np.random.default_rng(5)
    a, b = EmpiricalMeasure(rng.random((4, 2))), EmpiricalMeasure(rng.random(3))
    assert product_subadditivity_terms(3, a, a, b, b) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_product_subadditivity_guard():
    big = EmpiricalMeasure(np.zeros(13))
    with pytest.raises(SampleError):
        product_subadditivity_check(1, big, big, big, big)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]))
@settings(max_examples=30, deadline=None)
def test_product_subadditivity_random(seed, p):
    rng = np.random.default_rng(seed)

    def m(dim):
        k = int(rng.integers(1, 6))
        return EmpiricalMeasure(rng.normal(size=(k, dim)), rng.dirichlet(np.ones(k)))

    assert product_subadditivity_check(p, m(1), m(1), m(2), m(2))


def test_quantize_measure():
    pts = np.random.default_rng(6).normal(size=(5000, 2))
    q = quantize_measure(pts, 40, seed=1)
    assert q.size <= 40 and abs(q.weights.sum() - 1) <= 1e-12
    np.testing.assert_allclose(q.weights @ q.atoms, pts.mean(axis=0), atol=1e-10)
    assert q.atoms.tolist() == quantize_measure(pts, 40, seed=1).atoms.tolist()

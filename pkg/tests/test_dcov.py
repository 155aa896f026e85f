import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depcov import (
    ConsistencyError,
    PairedSample,
    block_kernel_H,
    centered_distance_matrix,
    dcov_blocks,
    dcov_fast,
    dcov_v_oracle,
    hoeffding_h1_estimate,
    kernel_f,
    kernel_h_prime,
    kernel_h_sym,
    partition_blocks,
)
from depcov.dcov import IndexedDcov, _clamp, block_vstatistic


def _norm(u, v):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(u, v)))


def _h_plain(z):
    # kernel written out with plain Python arithmetic, independent of depcov
    (x1, y1), (x2, y2), (x3, _), (x4, _), (_, y5), (_, y6) = z
    fx = _norm(x1, x2) - _norm(x1, x3) - _norm(x2, x4) + _norm(x3, x4)
    fy = _norm(y1, y2) - _norm(y1, y5) - _norm(y2, y6) + _norm(y5, y6)
    return fx * fy


def _heap_permutations(items):
    items = list(items)
    c = [0] * len(items)
    yield tuple(items)
    i = 0
    while i < len(items):
        if c[i] < i:
            j = 0 if i % 2 == 0 else c[i]
            items[j], items[i] = items[i], items[j]
            yield tuple(items)
            c[i] += 1
            i = 0
        else:
            c[i] = 0
            i += 1


def _rand_sample(rng, n, lx=1, ly=1):
    return PairedSample(rng.normal(size=(n, lx)), rng.normal(size=(n, ly)))


def test_kernel_f_examples():
    assert kernel_f(1.5, 1.5, 1.5, 1.5) == 0.0
    assert kernel_f(0, 1, 0, 1) == 2.0


def test_kernel_f_swap_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=(4, 3))
        assert kernel_f(*x) == pytest.approx(kernel_f(x[1], x[0], x[3], x[2]), abs=1e-14)


def test_kernel_h_prime_examples():
    rng = np.random.default_rng(1)
    same_y = [(rng.normal(size=2), np.array([0.3])) for _ in range(6)]
    assert kernel_h_prime(*same_y) == 0.0
    same_x = [(np.array([1.0]), rng.normal(size=1)) for _ in range(6)]
    assert kernel_h_prime(*same_x) == 0.0
    xs = (0, 1, 0, 1, 7, 9)
    ys = (0, 1, 5, 3, 0, 1)
    assert kernel_h_prime(*zip(xs, ys)) == 4.0


def test_kernel_h_sym_identical_points():
    z = [(np.array([0.2]), np.array([0.4]))] * 6
    assert kernel_h_sym(*z) == 0.0


def test_kernel_h_sym_matches_independent_enumerator():
    rng = np.random.default_rng(2)
    for _ in range(3):
        z = [((float(rng.normal()),), (float(rng.normal()),)) for _ in range(6)]
        vals = [_h_plain(p) for p in _heap_permutations(z)]
        assert len(vals) == 720
        assert kernel_h_sym(*z) == pytest.approx(math.fsum(vals) / 720, rel=1e-12, abs=1e-14)


def test_kernel_h_sym_permutation_exact():
    rng = np.random.default_rng(3)
    z = [(rng.normal(size=1), rng.normal(size=2)) for _ in range(6)]
    base = kernel_h_sym(*z)
    for perm in itertools.islice(itertools.permutations(range(6)), 0, 720, 97):
        assert kernel_h_sym(*(z[i] for i in perm)) == base


def test_two_point_value():
    s = PairedSample([0.0, 1.0], [0.0, 1.0])
    assert dcov_fast(s).value == 0.25
    assert dcov_v_oracle(s).value == pytest.approx(0.25, abs=1e-15)


def test_oracle_trivial_cases():
    assert dcov_v_oracle(PairedSample([3.0], [1.0])).value == 0.0
    rng = np.random.default_rng(4)
    assert dcov_v_oracle(PairedSample(np.full(5, 2.0), rng.normal(size=5))).value == 0.0
    assert dcov_fast(PairedSample(np.full(5, 2.0), rng.normal(size=5))).value == 0.0


def test_oracle_matches_plain_python_sum():
    rng = np.random.default_rng(5)
    s = _rand_sample(rng, 3, 2, 1)
    z = [(tuple(s.x[i]), tuple(s.y[i])) for i in range(3)]
    total = math.fsum(_h_plain([z[i] for i in idx]) for idx in itertools.product(range(3), repeat=6))
    assert dcov_v_oracle(s).value == pytest.approx(total / 3**6, rel=1e-12)


def test_fast_matches_oracle_small_n():
    rng = np.random.default_rng(6)
    for n in range(2, 9):
        for lx, ly in ((1, 1), (2, 1), (1, 2), (2, 2)):
            s = _rand_sample(rng, n, lx, ly)
            o = dcov_v_oracle(s).value
            assert abs(dcov_fast(s).value - o) <= 1e-10 * (1 + abs(o))


def test_affine_equivariance():
    rng = np.random.default_rng(7)
    s = _rand_sample(rng, 30, 2, 1)
    t = PairedSample(-2.5 * s.x + 3.0, 0.4 * s.y - 1.0)
    assert dcov_fast(t).value == pytest.approx(2.5 * 0.4 * dcov_fast(s).value, rel=1e-9)


@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_permutation_invariance_is_exact(n, seed):
    rng = np.random.default_rng(seed)
    s = _rand_sample(rng, n, 2, 1)
    pi = rng.permutation(n)
    assert dcov_fast(PairedSample(s.x[pi], s.y[pi])).value == dcov_fast(s).value


@given(st.integers(1, 30), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_nonnegative(n, seed, scale):
    rng = np.random.default_rng(seed)
    s = PairedSample(scale * rng.normal(size=(n, 2)), rng.standard_cauchy(size=n))
    assert dcov_fast(s).value >= 0.0


def test_centered_rows_vanish():
    rng = np.random.default_rng(8)
    a = centered_distance_matrix(rng.normal(size=(25, 3)))
    np.testing.assert_allclose(a.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(a, a.T, atol=0)


def test_clamp_rejects_large_negative():
    assert _clamp(-1e-12, 1.0) == 0.0
    with pytest.raises(ConsistencyError):
        _clamp(-1e-3, 1.0)


def test_block_kernel_d1_is_kernel():
    rng = np.random.default_rng(9)
    z = [(rng.normal(size=(1, 2)), rng.normal(size=(1, 1))) for _ in range(6)]
    assert block_kernel_H(z) == pytest.approx(kernel_h_prime(*[(x[0], y[0]) for x, y in z]), rel=1e-13)


def test_block_kernel_identical_blocks():
    block = (np.ones((3, 1)), np.full((3, 1), 2.0))
    assert block_kernel_H([block] * 6) == 0.0


def test_block_kernel_d2_matches_loop_nest():
    rng = np.random.default_rng(10)
    blocks = [(rng.normal(size=(2, 1)), rng.normal(size=(2, 1))) for _ in range(6)]
    vals = []
    for c in itertools.product(range(2), repeat=6):
        z = [(tuple(blocks[k][0][c[k]]), tuple(blocks[k][1][c[k]])) for k in range(6)]
        vals.append(_h_plain(z))
    assert block_kernel_H(blocks) == pytest.approx(math.fsum(vals) / 64, rel=1e-12)


def test_dcov_blocks_edge_cases():
    rng = np.random.default_rng(11)
    s = _rand_sample(rng, 6)
    assert dcov_blocks(partition_blocks(s, 6)).value == dcov_fast(s).value
    assert dcov_blocks(partition_blocks(s, 1)).value == dcov_fast(s).value


def test_block_vstatistic_n4_d2():
    rng = np.random.default_rng(12)
    s = _rand_sample(rng, 4)
    p = partition_blocks(s, 2)
    fast = dcov_fast(s).value
    assert abs(block_vstatistic(p) - fast) <= 1e-10 * abs(fast)


def test_indexed_matches_materialized():
    rng = np.random.default_rng(13)
    s = _rand_sample(rng, 40, 2, 2)
    stat = IndexedDcov(s)
    for _ in range(5):
        ix, iy = rng.integers(0, 40, size=40), rng.integers(0, 40, size=40)
        ref = dcov_fast(PairedSample(s.x[ix], s.y[iy])).value
        assert stat(ix, iy) == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_h1_constant_pool_is_zero():
    rng = np.random.default_rng(14)
    est, se = hoeffding_h1_estimate((np.array([2.0]), np.array([0.5])), np.full((50, 1), 2.0), rng.normal(size=(50, 1)))
    assert est == 0.0 and se == 0.0


def test_h1_degenerate_and_deterministic():
    rng = np.random.default_rng(15)
    xp, yp = rng.normal(size=(300, 2)), rng.exponential(size=(300, 1))
    z = (rng.normal(size=2), rng.exponential(size=1))
    est, se = hoeffding_h1_estimate(z, xp, yp, m=10_000, seed=3)
    assert abs(est) <= 4 * se
    assert hoeffding_h1_estimate(z, xp, yp, m=10_000, seed=3) == (est, se)


def test_h1_needs_enough_draws():
    with pytest.raises(ValueError):
        hoeffding_h1_estimate((0.0, 0.0), np.zeros(5), np.zeros(5), m=10)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from depcov import PairedSample, SampleError, load_csv, partition_blocks, vectorize


def _write(tmp_path, text, name="s.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_three_rows(tmp_path):
    s = load_csv(_write(tmp_path, "1,2\n3,4\n5,6\n"), 1, 1)
    assert s.n == 3
    np.testing.assert_array_equal(s.x[:, 0], [1, 3, 5])
    np.testing.assert_array_equal(s.y[:, 0], [2, 4, 6])


def test_load_header_and_blank_lines(tmp_path):
    s = load_csv(_write(tmp_path, "x1,x2,y1\n1,2,3\n\n4,5,6\n"), 2, 1)
    assert (s.n, s.x_dim, s.y_dim) == (2, 2, 1)


def test_load_nan_names_row(tmp_path):
    with pytest.raises(SampleError, match="row 3") as info:
        load_csv(_write(tmp_path, "1,2\n3,4\nnan,6\n"), 1, 1)
    assert info.value.row == 3


def test_load_non_numeric_names_row(tmp_path):
    with pytest.raises(SampleError, match="row 2"):
        load_csv(_write(tmp_path, "1,2\n3,abc\n"), 1, 1)


def test_load_wrong_field_count(tmp_path):
    with pytest.raises(SampleError, match="row 1"):
        load_csv(_write(tmp_path, "1,2,3\n"), 1, 1)


def test_load_header_only_is_empty(tmp_path):
    with pytest.raises(SampleError, match="empty sample"):
        load_csv(_write(tmp_path, "x1,y1\n"), 1, 1)


def test_paired_sample_validation():
    with pytest.raises(SampleError):
        PairedSample(np.zeros(3), np.zeros(4))
    with pytest.raises(SampleError):
        PairedSample(np.array([1.0, np.inf]), np.zeros(2))
    with pytest.raises(SampleError):
        PairedSample(np.zeros((0, 1)), np.zeros((0, 1)))


def test_paired_sample_is_read_only():
    s = PairedSample(np.arange(3.0), np.arange(3.0))
    with pytest.raises(ValueError):
        s.x[0, 0] = 5.0


@pytest.mark.parametrize("n, d, N, tail", [(6, 2, 3, 0), (7, 2, 3, 1)])
def test_partition_counts(n, d, N, tail):
    p = partition_blocks(PairedSample(np.arange(n, dtype=float), np.arange(n, dtype=float)), d)
    assert (p.block_count, p.discarded_tail, p.retained) == (N, tail, N * d)


def test_partition_rejects_long_blocks():
    s = PairedSample(np.arange(5.0), np.arange(5.0))
    with pytest.raises(SampleError):
        partition_blocks(s, 6)
    with pytest.raises(SampleError):
        partition_blocks(s, 0)


def test_vectorize_shapes():
    s = PairedSample(np.arange(4.0), np.arange(4.0) + 10)
    v = vectorize(s, 2).inner
    assert (v.n, v.x_dim, v.y_dim) == (2, 2, 2)
    np.testing.assert_array_equal(v.x, [[0, 1], [2, 3]])
    np.testing.assert_array_equal(v.y, [[10, 11], [12, 13]])
    assert vectorize(PairedSample(np.arange(5.0), np.arange(5.0)), 2).inner.n == 2


samples = st.integers(1, 40).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, (n, 2), elements=st.floats(-1e6, 1e6)),
        arrays(np.float64, (n, 1), elements=st.floats(-1e6, 1e6)),
    )
)


@given(samples, st.integers(1, 40))
@settings(max_examples=60, deadline=None)
def test_partition_flattening_is_bit_equal(xy, d):
    s = PairedSample(*xy)
    if d > s.n:
        return
    p = partition_blocks(s, d)
    m = p.retained
    assert np.array_equal(p.x_blocks.reshape(m, -1), s.x[:m])
    assert np.array_equal(p.y_blocks.reshape(m, -1), s.y[:m])


@given(samples)
@settings(max_examples=40, deadline=None)
def test_vectorize_one_round_trips(xy):
    s = PairedSample(*xy)
    assert vectorize(s, 1).inner.equals(s)


@given(samples, st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_vectorize_commutes_with_truncation(xy, J, d):
    s = PairedSample(*xy)
    if d > s.n or J > s.n:
        return
    m = partition_blocks(s, d).retained
    if J > m:
        return
    lhs = vectorize(s.head(m), J).inner
    full = vectorize(s, J).inner
    assert lhs.equals(full.head(m // J))

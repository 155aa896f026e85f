"""Distance covariance: kernels, V-statistic oracle and fast estimators.

The empirical distance covariance of a paired sample is the V-statistic of
order six with kernel

    h'(z1, ..., z6) = f(x1, x2, x3, x4) * f(y1, y2, y5, y6),
    f(x1, x2, x3, x4) = |x1 - x2| - |x1 - x3| - |x2 - x4| + |x3 - x4|,

and equals the mean of the elementwise product of the double-centered
distance matrices of the two coordinates.  The full index sum over ``h'``
is unchanged by symmetrization, so ``h'`` is used everywhere in execution;
:func:`kernel_h_sym` exists for checking that claim.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np
from scipy.spatial.distance import cdist

from depcov._rng import as_generator
from depcov.errors import ConsistencyError, SampleError
from depcov.series import BlockPartition, PairedSample

DEFAULT_MAX_N = 20000
ORACLE_MAX_N = 12
NEGATIVE_TOL = 1e-9


@dataclass(frozen=True)
class DcovValue:
    value: float
    n: int

    def __float__(self):
        return self.value


def _point(u) -> np.ndarray:
    return np.atleast_1d(np.asarray(u, dtype=np.float64))


def kernel_f(x1, x2, x3, x4) -> float:
    pts = [_point(u) for u in (x1, x2, x3, x4)]
    if len({p.shape for p in pts}) != 1 or pts[0].ndim != 1:
        raise SampleError("kernel_f arguments must be points of equal dimension")
    a, b, c, e = pts
    nrm = np.linalg.norm
    return float(nrm(a - b) - nrm(a - c) - nrm(b - e) + nrm(c - e))


def _split(z):
    try:
        x, y = z
    except (TypeError, ValueError):
        raise SampleError("each observation must be an (x, y) pair") from None
    return _point(x), _point(y)


def kernel_h_prime(*z) -> float:
    """``f(x1, x2, x3, x4) * f(y1, y2, y5, y6)`` for six ``(x, y)`` pairs."""
    if len(z) != 6:
        raise SampleError(f"h' takes six observations, got {len(z)}")
    xs, ys = zip(*(_split(zi) for zi in z))
    if len({x.shape for x in xs}) != 1 or len({y.shape for y in ys}) != 1:
        raise SampleError("observations must share x and y dimensions")
    return kernel_f(xs[0], xs[1], xs[2], xs[3]) * kernel_f(ys[0], ys[1], ys[4], ys[5])


def kernel_h_sym(*z) -> float:
    """Average of ``h'`` over all 720 orderings of the arguments."""
    if len(z) != 6:
        raise SampleError(f"h takes six observations, got {len(z)}")
    pairs = [_split(zi) for zi in z]
    total = math.fsum(kernel_h_prime(*(pairs[i] for i in perm)) for perm in itertools.permutations(range(6)))
    return total / 720.0


def _distances(u: np.ndarray) -> np.ndarray:
    return cdist(u, u)


def centered_distance_matrix(u) -> np.ndarray:
    """``A_ij = |u_i - u_j| - a_i - a_j + D`` with row means ``a`` and grand mean ``D``."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
    dist = _distances(u)
    row = dist.mean(axis=1)
    return dist - row[:, None] - row[None, :] + row.mean()


def _clamp(value: float, scale: float) -> float:
    if value >= 0.0:
        return value
    if value >= -NEGATIVE_TOL * scale:
        return 0.0
    raise ConsistencyError(f"distance covariance {value!r} is negative beyond tolerance (scale {scale!r})")


def _row_sums(m: np.ndarray) -> np.ndarray:
    # sorting first makes each sum independent of the column order
    return np.sort(m, axis=1).sum(axis=1)


def _total(m: np.ndarray) -> float:
    return float(np.sort(_row_sums(m)).sum())


def dcov_fast(s: PairedSample, max_n: int = DEFAULT_MAX_N) -> DcovValue:
    """``n^-2 sum_ij A_ij B_ij`` from the double-centered distance matrices.

    Quadratic in time and memory; ``max_n`` caps the sample length.  Every
    sum is taken in sorted order, so permuting the rows of the sample leaves
    the result bit-identical.
    """
    if s.n > max_n:
        raise SampleError(f"sample length {s.n} exceeds the configured limit {max_n}")
    n = s.n
    dx = _distances(s.x)
    dy = _distances(s.y)
    rx = _row_sums(dx) / n
    ry = _row_sums(dy) / n
    mx = float(np.sort(rx).sum()) / n
    my = float(np.sort(ry).sum()) / n
    a = dx - rx[:, None] - rx[None, :] + mx
    b = dy - ry[:, None] - ry[None, :] + my
    value = _total(a * b) / (float(n) * n)
    return DcovValue(_clamp(value, mx * my), n)


def dcov_v_oracle(s: PairedSample) -> DcovValue:
    """Brute-force ``n^-6`` sum of ``h'`` over all index 6-tuples.

    Materializes the full ``n^6`` tensor of kernel values; ``n <= 12``.
    """
    n = s.n
    if n > ORACLE_MAX_N:
        raise SampleError(f"oracle costs n^6; n={n} exceeds {ORACLE_MAX_N}")
    dx = np.linalg.norm(s.x[:, None, :] - s.x[None, :, :], axis=-1)
    dy = np.linalg.norm(s.y[:, None, :] - s.y[None, :, :], axis=-1)
    # fx[i1, i2, i3, i4] and fy[i1, i2, i5, i6]
    fx = dx[:, :, None, None] - dx[:, None, :, None] - dx[None, :, None, :] + dx[None, None, :, :]
    fy = dy[:, :, None, None] - dy[:, None, :, None] - dy[None, :, None, :] + dy[None, None, :, :]
    terms = fx[:, :, :, :, None, None] * fy[:, :, None, None, :, :]
    value = float(terms.sum()) / n**6
    scale = float(dx.mean() * dy.mean())
    return DcovValue(_clamp(value, scale), n)


def _block_pair(block):
    xb, yb = block
    xb = np.asarray(xb, dtype=np.float64)
    yb = np.asarray(yb, dtype=np.float64)
    if xb.ndim == 1:
        xb = xb[:, None]
    if yb.ndim == 1:
        yb = yb[:, None]
    return xb, yb


def block_kernel_H(blocks: Sequence) -> float:
    """``d^-6`` sum of ``h'`` over one coordinate from each of six blocks.

    Each block is an ``(x_block, y_block)`` pair of arrays with ``d`` rows.
    """
    if len(blocks) != 6:
        raise SampleError(f"H takes six blocks, got {len(blocks)}")
    pairs = [_block_pair(b) for b in blocks]
    d = pairs[0][0].shape[0]
    for xb, yb in pairs:
        if xb.shape[0] != d or yb.shape[0] != d:
            raise SampleError("all blocks must have the same length")
    if d > 12:
        raise SampleError(f"H costs d^6; d={d} is too large")
    (x1, y1), (x2, y2), (x3, _), (x4, _), (_, y5), (_, y6) = pairs
    return _H_from_distances(
        (cdist(x1, x2), cdist(x1, x3), cdist(x2, x4), cdist(x3, x4)),
        (cdist(y1, y2), cdist(y1, y5), cdist(y2, y6), cdist(y5, y6)),
    )


def _H_from_distances(dxs, dys) -> float:
    # dxs = (|x1-x2|, |x1-x3|, |x2-x4|, |x3-x4|) as d x d coordinate tables, likewise dys
    a12, a13, a24, a34 = dxs
    b12, b15, b26, b56 = dys
    d = a12.shape[0]
    fx = a12[:, :, None, None] - a13[:, None, :, None] - a24[None, :, None, :] + a34[None, None, :, :]
    fy = b12[:, :, None, None] - b15[:, None, :, None] - b26[None, :, None, :] + b56[None, None, :, :]
    return float((fx[:, :, :, :, None, None] * fy[:, :, None, None, :, :]).sum()) / d**6


def block_vstatistic(p: BlockPartition, max_terms: int = 10**6) -> float:
    """Explicit ``N^-6 sum H(B_i1, ..., B_i6)`` over all block 6-tuples.

    Only for checking :func:`dcov_blocks` on tiny samples.  Block-to-block
    distance tables are computed once; ``H`` is evaluated for every tuple.
    """
    N = p.block_count
    if N**6 > max_terms:
        raise SampleError(f"{N}^6 block tuples exceed the limit {max_terms}")
    dx = [[cdist(p.x_blocks[k], p.x_blocks[l]) for l in range(N)] for k in range(N)]
    dy = [[cdist(p.y_blocks[k], p.y_blocks[l]) for l in range(N)] for k in range(N)]
    total = math.fsum(
        _H_from_distances((dx[i1][i2], dx[i1][i3], dx[i2][i4], dx[i3][i4]), (dy[i1][i2], dy[i1][i5], dy[i2][i6], dy[i5][i6]))
        for i1, i2, i3, i4, i5, i6 in itertools.product(range(N), repeat=6)
    )
    return total / N**6


def dcov_blocks(p: BlockPartition) -> DcovValue:
    """Distance covariance of the retained ``N*d`` prefix."""
    return dcov_fast(p.prefix())


@numba.njit(cache=True, nogil=True)
def _dcov_indexed(dx, dy, ix, iy):
    # dcov of the sample whose i-th row is (x[ix[i]], y[iy[i]]), read from the
    # distance matrices of the original sample without materializing the
    # resampled ones: mean(a*b) + mean(a)*mean(b) - 2*mean_i(rowmean_a*rowmean_b).
    n = ix.shape[0]
    s_ab = 0.0
    s_a = 0.0
    s_b = 0.0
    s_rr = 0.0
    for i in range(n):
        rx = dx[ix[i]]
        ry = dy[iy[i]]
        acc = 0.0
        ra = 0.0
        rb = 0.0
        for j in range(n):
            a = rx[ix[j]]
            b = ry[iy[j]]
            acc += a * b
            ra += a
            rb += b
        s_ab += acc
        s_a += ra
        s_b += rb
        s_rr += ra * rb
    n2 = float(n) * float(n)
    mean_a = s_a / n2
    mean_b = s_b / n2
    return s_ab / n2 + mean_a * mean_b - 2.0 * s_rr / (n2 * n), mean_a * mean_b


class IndexedDcov:
    """Distance covariance of index-resampled versions of one sample.

    Pairwise distances of the original sample are computed once; each call
    evaluates the statistic of ``(x[ix], y[iy])`` in ``O(n^2)`` time and
    ``O(1)`` extra memory.
    """

    def __init__(self, s: PairedSample, max_n: int = DEFAULT_MAX_N):
        if s.n > max_n:
            raise SampleError(f"sample length {s.n} exceeds the configured limit {max_n}")
        self.n = s.n
        self._dx = np.ascontiguousarray(_distances(s.x))
        self._dy = np.ascontiguousarray(_distances(s.y))

    def __call__(self, ix: np.ndarray, iy: np.ndarray) -> float:
        ix = np.ascontiguousarray(ix, dtype=np.int64)
        iy = np.ascontiguousarray(iy, dtype=np.int64)
        value, scale = _dcov_indexed(self._dx, self._dy, ix, iy)
        return _clamp(float(value), float(scale))


def hoeffding_h1_estimate(z, x_pool, y_pool, m: int = 10000, seed=0) -> tuple[float, float]:
    """Monte Carlo estimate of ``E h'(z, Z2, ..., Z6)`` under ``mu_n (x) nu_n``.

    ``Z2..Z6`` take independent uniform picks from ``x_pool`` and, separately,
    from ``y_pool``.  Returns ``(estimate, standard_error)``; the first-order
    Hoeffding projection of the kernel vanishes under any product measure,
    so the estimate should be within a few standard errors of zero.
    """
    if m < 100:
        raise ValueError(f"need at least 100 Monte Carlo draws, got {m}")
    zx, zy = _split(z)
    xp = np.asarray(x_pool, dtype=np.float64)
    yp = np.asarray(y_pool, dtype=np.float64)
    if xp.ndim == 1:
        xp = xp[:, None]
    if yp.ndim == 1:
        yp = yp[:, None]
    if xp.shape[0] == 0 or yp.shape[0] == 0:
        raise SampleError("empty pool")
    if xp.shape[1] != zx.shape[0] or yp.shape[1] != zy.shape[0]:
        raise SampleError("pool dimensions do not match the observation")
    rng = as_generator(seed)
    kx = rng.integers(0, xp.shape[0], size=(m, 5))
    ky = rng.integers(0, yp.shape[0], size=(m, 5))
    x2, x3, x4 = xp[kx[:, 0]], xp[kx[:, 1]], xp[kx[:, 2]]
    y2, y5, y6 = yp[ky[:, 0]], yp[ky[:, 3]], yp[ky[:, 4]]
    nrm = lambda u: np.linalg.norm(u, axis=1)  # noqa: E731
    fx = nrm(zx - x2) - nrm(zx - x3) - nrm(x2 - x4) + nrm(x3 - x4)
    fy = nrm(zy - y2) - nrm(zy - y5) - nrm(y2 - y6) + nrm(y5 - y6)
    vals = fx * fy
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(m))

"""Non-overlapping block bootstrap for the distance covariance test.

Blocks of X and blocks of Y are drawn with replacement *independently of
each other*, which keeps serial dependence within each series while
breaking any dependence between them.  The test rejects independence when
``n * dcov`` exceeds the upper ``alpha`` quantile of the bootstrap
replicates ``n * V*``.

Replicate ``b`` draws from ``substream(base_seed, b)`` (see
:mod:`depcov._rng`): first the ``N`` X-block indices, then the ``N``
Y-block indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from depcov._rng import ordered_map, substream
from depcov.dcov import DEFAULT_MAX_N, IndexedDcov, dcov_fast
from depcov.errors import DegenerateBootstrapError
from depcov.series import BlockPartition, PairedSample, partition_blocks, vectorize


@dataclass(frozen=True)
class BootstrapConfig:
    """Test configuration.

    Exactly one of ``gamma`` (block length ``floor(ln(n)**gamma)``) and
    ``block_len`` should be given; an explicit ``block_len`` wins.
    """

    gamma: float | None = 0.45
    block_len: int | None = None
    replicates: int = 200
    alpha: float = 0.1
    base_seed: int = 0
    vectorize_stride: int = 1

    def __post_init__(self):
        if self.block_len is None:
            if self.gamma is None:
                raise ValueError("either gamma or block_len is required")
            if not 0.0 < self.gamma < 0.5:
                raise ValueError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        elif self.block_len < 1:
            raise ValueError(f"block_len must be positive, got {self.block_len}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        if self.vectorize_stride < 1:
            raise ValueError("vectorize_stride must be positive")

    def block_len_for(self, n: int) -> int:
        if self.block_len is not None:
            return self.block_len
        return block_length(n, self.gamma)

    def with_seed(self, base_seed: int) -> "BootstrapConfig":
        return replace(self, base_seed=base_seed)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "block_len": self.block_len,
            "replicates": self.replicates,
            "alpha": self.alpha,
            "base_seed": self.base_seed,
            "vectorize_stride": self.vectorize_stride,
        }


@dataclass(frozen=True)
class BootstrapOutcome:
    statistic: float
    replicate_stats: tuple[float, ...] = field(repr=False)
    quantile: float
    p_value: float
    reject: bool
    d_used: int
    N_used: int

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "replicate_stats": list(self.replicate_stats),
            "quantile": self.quantile,
            "p_value": self.p_value,
            "reject": self.reject,
            "d_used": self.d_used,
            "N_used": self.N_used,
        }


def block_length(n: int, gamma: float) -> int:
    """``max(1, floor(ln(n) ** gamma))``."""
    if n < 2:
        raise ValueError(f"block length needs n >= 2, got {n}")
    if not 0.0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2), got {gamma}")
    return max(1, math.floor(math.log(n) ** gamma))


def _draw_block_indices(N: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    kx = rng.integers(0, N, size=N)
    ky = rng.integers(0, N, size=N)
    return kx, ky


def _row_indices(blocks: np.ndarray, d: int) -> np.ndarray:
    return (blocks[:, None] * d + np.arange(d)[None, :]).ravel()


def resample_blocks(p: BlockPartition, rng: np.random.Generator) -> PairedSample:
    """One bootstrap sample: ``N`` X-blocks and, independently, ``N`` Y-blocks."""
    kx, ky = _draw_block_indices(p.block_count, rng)
    x = p.x_blocks[kx].reshape(p.retained, -1)
    y = p.y_blocks[ky].reshape(p.retained, -1)
    return PairedSample(x, y)


def _partition_for(s: PairedSample, cfg: BootstrapConfig) -> BlockPartition:
    d = cfg.block_len_for(s.n)
    if d > s.n:
        raise DegenerateBootstrapError(f"block length {d} exceeds sample length {s.n}")
    p = partition_blocks(s, d)
    if p.block_count < 2:
        raise DegenerateBootstrapError(
            f"bootstrap degenerate: single block (n={s.n}, d={d}); need at least two blocks"
        )
    return p


def _replicates(p: BlockPartition, cfg: BootstrapConfig, threads: int | None, max_n: int) -> np.ndarray:
    stat = IndexedDcov(p.prefix(), max_n=max_n)
    n, d, N = p.retained, p.block_len, p.block_count

    def one(b: int) -> float:
        kx, ky = _draw_block_indices(N, substream(cfg.base_seed, b))
        return n * stat(_row_indices(kx, d), _row_indices(ky, d))

    return np.array(ordered_map(one, range(cfg.replicates), threads), dtype=np.float64)


def bootstrap_distribution(
    s: PairedSample, cfg: BootstrapConfig, threads: int | None = 1, max_n: int = DEFAULT_MAX_N
) -> np.ndarray:
    """Replicates ``n * dcov`` of block-resampled samples, ``n`` the retained length.

    ``s`` is used as given; vectorization is applied by :func:`independence_test`.
    """
    return _replicates(_partition_for(s, cfg), cfg, threads, max_n)


def upper_quantile(stats, alpha: float) -> float:
    """Order statistic at 1-based rank ``ceil(B * (1 - alpha))``."""
    values = np.sort(np.asarray(stats, dtype=np.float64))
    B = values.shape[0]
    if B == 0:
        raise ValueError("no replicate statistics")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    # the 1e-9 guard keeps e.g. 100 * 0.95 = 95.00000000000001 at rank 95
    rank = min(B, max(1, math.ceil(B * (1.0 - alpha) - 1e-9)))
    return float(values[rank - 1])


def independence_test(
    s: PairedSample, cfg: BootstrapConfig, threads: int | None = 1, max_n: int = DEFAULT_MAX_N
) -> BootstrapOutcome:
    """Block bootstrap test of independence of the X and Y series.

    With ``cfg.vectorize_stride = J > 1`` the test runs on the sample of
    stacked ``J``-tuples, which also detects dependence between the series
    at lags below ``J``.
    """
    if cfg.vectorize_stride > 1:
        s = vectorize(s, cfg.vectorize_stride).inner
    p = _partition_for(s, cfg)
    statistic = p.retained * dcov_fast(p.prefix(), max_n=max_n).value
    reps = _replicates(p, cfg, threads, max_n)
    quantile = upper_quantile(reps, cfg.alpha)
    exceed = int(np.count_nonzero(reps >= statistic))
    return BootstrapOutcome(
        statistic=float(statistic),
        replicate_stats=tuple(float(v) for v in reps),
        quantile=quantile,
        p_value=(1 + exceed) / (reps.shape[0] + 1),
        reject=bool(statistic > quantile),
        d_used=p.block_len,
        N_used=p.block_count,
    )

"""Paired samples, CSV ingestion, block partitions and vectorization."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from depcov.errors import SampleError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Observations ``z_k = (x_k, y_k)``, ``k = 1..n``.

    ``x`` has shape ``(n, x_dim)`` and ``y`` has shape ``(n, y_dim)``.  A 1-d
    input is read as a single column.  Arrays are copied and made read-only.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if x.ndim != 2 or y.ndim != 2:
            raise SampleError("x and y must be 1-d or 2-d arrays")
        if x.shape[0] != y.shape[0]:
            raise SampleError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] < 1:
            raise SampleError("empty sample")
        if x.shape[1] < 1 or y.shape[1] < 1:
            raise SampleError("x and y need at least one coordinate")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise SampleError("all coordinates must be finite")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def x_dim(self) -> int:
        return self.x.shape[1]

    @property
    def y_dim(self) -> int:
        return self.y.shape[1]

    def __len__(self):
        return self.n

    def head(self, m: int) -> "PairedSample":
        """The first ``m`` observations."""
        if not 1 <= m <= self.n:
            raise SampleError(f"cannot take {m} rows from a sample of length {self.n}")
        return PairedSample(self.x[:m], self.y[:m])

    def equals(self, other: "PairedSample") -> bool:
        """Bit-equal values and shapes."""
        return (
            self.x.shape == other.x.shape
            and self.y.shape == other.y.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """``N`` non-overlapping length-``d`` blocks of each series.

    ``x_blocks[k, i]`` is ``x_{k*d + i}`` (0-based).  The last
    ``discarded_tail`` observations do not fit a full block and are dropped.
    """

    block_len: int
    block_count: int
    x_blocks: np.ndarray
    y_blocks: np.ndarray
    discarded_tail: int

    @property
    def retained(self) -> int:
        return self.block_len * self.block_count

    def prefix(self) -> PairedSample:
        """The retained ``N*d`` observations, in original order."""
        return PairedSample(
            self.x_blocks.reshape(self.retained, -1),
            self.y_blocks.reshape(self.retained, -1),
        )


@dataclass(frozen=True, eq=False)
class VectorizedSample:
    stride: int
    inner: PairedSample


def partition_blocks(s: PairedSample, d: int) -> BlockPartition:
    if d < 1:
        raise SampleError(f"block length must be positive, got {d}")
    if d > s.n:
        raise SampleError(f"block length {d} exceeds sample length {s.n}")
    N = s.n // d
    m = N * d
    return BlockPartition(
        block_len=d,
        block_count=N,
        x_blocks=_frozen(s.x[:m].reshape(N, d, s.x_dim)),
        y_blocks=_frozen(s.y[:m].reshape(N, d, s.y_dim)),
        discarded_tail=s.n - m,
    )


def vectorize(s: PairedSample, J: int) -> VectorizedSample:
    """Group ``J`` consecutive observations into one.

    Row ``k`` of the result has X part ``(x_{kJ}, ..., x_{kJ+J-1})``
    concatenated, and likewise for Y.  Trailing ``n mod J`` rows are dropped.
    """
    if J < 1:
        raise SampleError(f"vectorization stride must be positive, got {J}")
    if J > s.n:
        raise SampleError(f"vectorization stride {J} exceeds sample length {s.n}")
    m = s.n // J
    x = s.x[: m * J].reshape(m, J * s.x_dim)
    y = s.y[: m * J].reshape(m, J * s.y_dim)
    return VectorizedSample(stride=J, inner=PairedSample(x, y))


def _header_names(x_dim, y_dim):
    return [f"x{i}" for i in range(1, x_dim + 1)] + [f"y{i}" for i in range(1, y_dim + 1)]


def load_csv(path: str | os.PathLike, x_dim: int, y_dim: int) -> PairedSample:
    """Read a comma-separated file with ``x_dim + y_dim`` numeric columns.

    Columns are X first, then Y.  An optional first row
    ``x1,...,x{x_dim},y1,...,y{y_dim}`` is skipped.  Blank lines are ignored.
    Errors carry the 1-based row number of the offending line.
    """
    if x_dim < 1 or y_dim < 1:
        raise SampleError("x_dim and y_dim must be positive")
    width = x_dim + y_dim
    header = _header_names(x_dim, y_dim)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            stripped = [f.strip() for f in fields]
            if not rows and lineno == 1 and [f.lower() for f in stripped] == header:
                continue
            if len(stripped) != width:
                raise SampleError(
                    f"expected {width} fields ({x_dim} x + {y_dim} y), found {len(stripped)}",
                    row=lineno,
                )
            values = []
            for col, token in enumerate(stripped, start=1):
                try:
                    v = float(token)
                except ValueError:
                    raise SampleError(f"non-numeric field {token!r} in column {col}", row=lineno) from None
                if not math.isfinite(v):
                    raise SampleError(f"non-finite value {token!r} in column {col}", row=lineno)
                values.append(v)
            rows.append(values)
    if not rows:
        raise SampleError("empty sample: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return PairedSample(data[:, :x_dim], data[:, x_dim:])

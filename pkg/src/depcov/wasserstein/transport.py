"""Exact Wasserstein distances between finitely supported measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix
from scipy.spatial.distance import cdist

from depcov.errors import SampleError

WEIGHT_TOL = 1e-12
DEFAULT_MAX_ATOMS = 512


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted atoms in ``R^m``; ``weights=None`` means uniform."""

    atoms: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if atoms.ndim != 2 or atoms.shape[0] == 0:
            raise SampleError("a measure needs at least one atom")
        if not np.isfinite(atoms).all():
            raise SampleError("atoms must be finite")
        k = atoms.shape[0]
        uniform = self.weights is None
        if uniform:
            weights = np.full(k, 1.0 / k)
        else:
            weights = np.asarray(self.weights, dtype=np.float64).ravel()
            if weights.shape[0] != k:
                raise SampleError(f"{k} atoms but {weights.shape[0]} weights")
            if (weights < 0).any():
                raise SampleError("weights must be nonnegative")
            if abs(weights.sum() - 1.0) > WEIGHT_TOL:
                raise SampleError(f"weights sum to {weights.sum()!r}, not 1")
            uniform = bool(np.all(weights == weights[0]))
        atoms.flags.writeable = False
        weights = np.array(weights)
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_uniform", uniform)

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        return cls(points)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def is_uniform(self) -> bool:
        return self._uniform


def product_measure(a: EmpiricalMeasure, b: EmpiricalMeasure) -> EmpiricalMeasure:
    """``a (x) b`` on ``R^(m_a + m_b)``."""
    ia, ib = np.meshgrid(np.arange(a.size), np.arange(b.size), indexing="ij")
    atoms = np.hstack([a.atoms[ia.ravel()], b.atoms[ib.ravel()]])
    weights = (a.weights[:, None] * b.weights[None, :]).ravel()
    return EmpiricalMeasure(atoms, weights / weights.sum())


def w_exact_1d(p: float, a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    """``d_p`` of two uniform 1-d measures of equal size via sorted matching."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if a.dim != 1 or b.dim != 1:
        raise SampleError("w_exact_1d needs 1-dimensional measures")
    if a.size != b.size:
        raise SampleError(f"sizes differ: {a.size} vs {b.size}")
    if not (a.is_uniform and b.is_uniform):
        raise SampleError("w_exact_1d needs uniform weights")
    diff = np.abs(np.sort(a.atoms[:, 0]) - np.sort(b.atoms[:, 0]))
    return float(np.mean(diff**p) ** (1.0 / p))


@dataclass(frozen=True)
class TransportSolution:
    cost: float  # optimal value of sum gamma_ij |a_i - b_j|^p, i.e. d_p^p
    plan: np.ndarray
    duality_gap: float


def _check_pair(a: EmpiricalMeasure, b: EmpiricalMeasure, max_atoms: int):
    if a.dim != b.dim:
        raise SampleError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.size + b.size > max_atoms:
        raise SampleError(f"{a.size + b.size} atoms exceed the exact-solver limit {max_atoms}")


def optimal_transport(p: float, a: EmpiricalMeasure, b: EmpiricalMeasure, max_atoms: int = DEFAULT_MAX_ATOMS) -> TransportSolution:
    """Exact optimal coupling for cost ``|s - s'|_2^p``.

    Equal-size uniform measures are solved as an assignment problem (an
    optimal plan is a permutation).  Otherwise the transport LP is solved by
    the HiGHS simplex and certified by the duality gap of the returned
    primal/dual pair.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    _check_pair(a, b, max_atoms)
    cost = cdist(a.atoms, b.atoms) ** p
    if a.size == b.size and a.is_uniform and b.is_uniform:
        rows, cols = linear_sum_assignment(cost)
        plan = np.zeros_like(cost)
        plan[rows, cols] = 1.0 / a.size
        return TransportSolution(float(cost[rows, cols].sum() / a.size), plan, 0.0)

    k, m = cost.shape
    ii, jj = np.meshgrid(np.arange(k), np.arange(m), indexing="ij")
    var = (ii * m + jj).ravel()
    a_eq = coo_matrix(
        (np.ones(2 * k * m), (np.r_[ii.ravel(), k + jj.ravel()], np.r_[var, var])),
        shape=(k + m, k * m),
    ).tocsr()
    b_eq = np.r_[a.weights, b.weights]
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = res.x.reshape(k, m)
    primal = float(cost.ravel() @ res.x)
    duals = res.eqlin.marginals
    u, v = duals[:k], duals[k:]
    dual = float(a.weights @ u + b.weights @ v)
    reduced = cost - u[:, None] - v[None, :]
    scale = 1.0 + abs(primal) + float(cost.max())
    if reduced.min() < -1e-7 * scale or abs(primal - dual) > 1e-7 * scale:
        raise RuntimeError("transport LP solution failed its optimality certificate")
    return TransportSolution(primal, plan, abs(primal - dual))


def transport_cost(p: float, a: EmpiricalMeasure, b: EmpiricalMeasure, max_atoms: int = DEFAULT_MAX_ATOMS) -> float:
    """``d_p^p(a, b)``."""
    return max(0.0, optimal_transport(p, a, b, max_atoms).cost)


def w_exact_discrete(p: float, a: EmpiricalMeasure, b: EmpiricalMeasure, max_atoms: int = DEFAULT_MAX_ATOMS) -> float:
    """``d_p(a, b)`` for finitely supported measures."""
    return transport_cost(p, a, b, max_atoms) ** (1.0 / p)


def product_subadditivity_terms(
    p: float, eta1: EmpiricalMeasure, xi1: EmpiricalMeasure, eta2: EmpiricalMeasure, xi2: EmpiricalMeasure
) -> tuple[float, float]:
    """``(d_p^p(eta1 x eta2, xi1 x xi2), max(1, 2^(p/2-1)) (d_p^p(eta1, xi1) + d_p^p(eta2, xi2)))``."""
    for m in (eta1, xi1, eta2, xi2):
        if m.size > 12:
            raise SampleError("product check limited to measures with at most 12 atoms")
    lhs = transport_cost(p, product_measure(eta1, eta2), product_measure(xi1, xi2))
    rhs = max(1.0, 2.0 ** (p / 2 - 1)) * (transport_cost(p, eta1, xi1) + transport_cost(p, eta2, xi2))
    return lhs, rhs


def product_subadditivity_check(
    p: float, eta1: EmpiricalMeasure, xi1: EmpiricalMeasure, eta2: EmpiricalMeasure, xi2: EmpiricalMeasure, rtol: float = 1e-9
) -> bool:
    """Whether the product-measure subadditivity inequality holds (up to solver round-off)."""
    lhs, rhs = product_subadditivity_terms(p, eta1, xi1, eta2, xi2)
    return lhs <= rhs + rtol * (1.0 + rhs)


def quantize_measure(points, k: int, seed: int = 0, iterations: int = 10) -> EmpiricalMeasure:
    """``k``-means quantization of a large sample into a weighted measure.

    Each centroid carries the fraction of points assigned to it; empty
    clusters are dropped.
    """
    from scipy.cluster.vq import kmeans2

    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if not 1 <= k <= pts.shape[0]:
        raise SampleError(f"k must lie in [1, {pts.shape[0]}], got {k}")
    centroids, labels = kmeans2(pts, k, iter=iterations, seed=np.random.default_rng(seed), minit="points")
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    keep = counts > 0
    return EmpiricalMeasure(centroids[keep], counts[keep] / counts[keep].sum())

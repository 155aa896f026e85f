"""Explicit bounds on Wasserstein distances for mixing processes.

Everything is stated for ``E d_p^p`` (the p-th power), never for ``d_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from depcov._rng import substream
from depcov.errors import BoundDomainError, PreconditionError
from depcov.wasserstein.transport import EmpiricalMeasure, transport_cost

C0_FLOOR = 2.0 + 1e-9
MAX_DYADIC_LEVEL = 48


def cube_diameter(m: int) -> float:
    """Supremum of pairwise distances in ``[0, 1)^m``."""
    return math.sqrt(m)


def zeta_fn(t: float) -> float:
    """``min(sqrt(t), t)``."""
    if t < 0:
        raise ValueError(f"zeta_fn needs t >= 0, got {t}")
    return min(math.sqrt(t), t)


def zeta_nr(xi_c: float, n: int, r: float, c0: float) -> float:
    """Majorant of ``E |n xi_n(C) - n xi(C)|`` as a function of ``xi(C)``.

    Three regimes: ``xi(C) <= 1/n``, ``1/n < xi(C) <= n^(-1/2)`` and above.
    """
    if not 0.0 <= xi_c <= 1.0:
        raise ValueError(f"xi(C) must lie in [0, 1], got {xi_c}")
    if n < 1 or r <= 1 or c0 <= 0:
        raise ValueError("need n >= 1, r > 1 and c0 > 0")
    t = n * xi_c
    if xi_c <= 1.0 / n:
        return c0 * zeta_fn(t)
    if xi_c <= n**-0.5:
        return c0 * n ** (0.5 - 1.0 / (2 * r)) * t ** (1.0 / r)
    return c0 * n**0.25 * zeta_fn(t)


def entropy_level_cap(n: float, r: float, d: int, M: float, K: float = 1.0) -> float:
    """``log2(2 K M^(1/d) n^(r/d))``: deepest dyadic level holding a cell of mass above ``n^-r``.

    ``K`` is the side of the cube carrying the measure (1 for the unit cube).
    """
    if n <= 0 or r <= 0 or d < 1 or M <= 0 or K <= 0:
        raise ValueError("entropy_level_cap needs positive n, r, d, M and K")
    return math.log2(2.0) + math.log2(K) + math.log2(M) / d + (r / d) * math.log2(n)


def default_c0(c: float, r0: float) -> float:
    """``1 + 64 c zeta(r0)`` floored just above 2.

    ``c`` and ``r0`` describe the mixing-rate majorant ``alpha(k) <= c k^-r0``.
    """
    if r0 <= 1:
        raise ValueError(f"r0 must exceed 1, got {r0}")
    if c < 0:
        raise ValueError("c must be nonnegative")
    return max(1.0 + 64.0 * c * float(hurwitz_zeta(r0, 1)), C0_FLOOR)


def polynomial_rate_constant(rho: float, r0: float) -> float:
    """Smallest ``c`` with ``rho^k <= c k^-r0`` for all integers ``k >= 1``."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    if rho == 0.0:
        return 0.0
    peak = r0 / math.log(1.0 / rho)
    ks = np.arange(1, int(math.ceil(2 * peak)) + 3)
    return float(np.max(rho**ks * ks.astype(float) ** r0))


# -- dyadic partition bound -------------------------------------------------


@dataclass(frozen=True)
class DyadicPartitionParams:
    """Truncation level and the cube ``origin + [0, side)^m`` that is rescaled to the unit cube."""

    max_level: int
    side: float = 1.0
    origin: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if not 0 <= self.max_level <= MAX_DYADIC_LEVEL:
            raise ValueError(f"max_level must lie in [0, {MAX_DYADIC_LEVEL}]")
        if self.side <= 0:
            raise ValueError("side must be positive")

    @classmethod
    def for_radius(cls, K: float, max_level: int) -> "DyadicPartitionParams":
        """Cube ``[-K, K)^m``, i.e. ``u -> u / (2K) + 1/2``."""
        return cls(max_level=max_level, side=2.0 * K, origin=-K)


def _unit_coords(mu: EmpiricalMeasure, params: DyadicPartitionParams, name: str) -> np.ndarray:
    u = (mu.atoms - np.asarray(params.origin, dtype=np.float64)) / params.side
    if (u < 0).any() or (u > 1).any():
        raise PreconditionError(f"support violation: {name} has atoms outside the declared cube")
    return np.where(u >= 1.0, 1.0 - 1e-12, u)


def _pooled_atoms(eta: EmpiricalMeasure, xi: EmpiricalMeasure, params: DyadicPartitionParams):
    if eta.dim != xi.dim:
        raise ValueError("measures must share a dimension")
    u = np.vstack([_unit_coords(eta, params, "eta"), _unit_coords(xi, params, "xi")])
    w_eta = np.r_[eta.weights, np.zeros(xi.size)]
    w_xi = np.r_[np.zeros(eta.size), xi.weights]
    live = (w_eta > 0) | (w_xi > 0)
    return u[live], w_eta[live], w_xi[live]


def _cells(u: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    keys = np.floor(u * 2.0**level).astype(np.int64)
    cells, cell_of = np.unique(keys, axis=0, return_inverse=True)
    return cells, cell_of.ravel()


def _level_terms(u, w_eta, w_xi, max_level: int) -> np.ndarray:
    out = np.empty(max_level + 1)
    for level in range(max_level + 1):
        children, child_of = _cells(u, level + 1)
        eta_c = np.bincount(child_of, weights=w_eta, minlength=len(children))
        xi_c = np.bincount(child_of, weights=w_xi, minlength=len(children))
        if ((xi_c > 0) & (eta_c == 0)).any():
            raise PreconditionError(
                f"lemma precondition violated: a level-{level + 1} cell has xi(C) > 0 but eta(C) = 0"
            )
        parents, parent_of = np.unique(children >> 1, axis=0, return_inverse=True)
        parent_of = parent_of.ravel()
        eta_f = np.bincount(parent_of, weights=eta_c, minlength=len(parents))[parent_of]
        xi_f = np.bincount(parent_of, weights=xi_c, minlength=len(parents))[parent_of]
        live = eta_f > 0
        # |xi(C) - xi(F) eta(C)/eta(F)| with one division, so eta = xi gives exact zeros
        out[level] = float(np.sum(np.abs(xi_c[live] * eta_f[live] - xi_f[live] * eta_c[live]) / eta_f[live]))
    return out


def _unresolved_mass(u, w_xi, level: int) -> float:
    """xi-mass of level-``level`` cells whose atoms are not all at one point.

    Below a cell where both measures sit on a single shared point every
    term of the tree sum vanishes, so only the remaining mass feeds the tail.
    """
    cells, cell_of = _cells(u, level)
    lo = np.full((len(cells), u.shape[1]), np.inf)
    hi = np.full((len(cells), u.shape[1]), -np.inf)
    np.minimum.at(lo, cell_of, u)
    np.maximum.at(hi, cell_of, u)
    spread = (hi > lo).any(axis=1)
    return float(np.sum(w_xi[spread[cell_of]]))


def dyadic_level_terms(
    eta: EmpiricalMeasure, xi: EmpiricalMeasure, params: DyadicPartitionParams
) -> np.ndarray:
    """``S_l = sum_F sum_{C <- F} |xi(C) - xi(F) eta(C) / eta(F)|`` for ``l = 0..L``.

    ``F`` runs over level-``l`` cells and ``C`` over its children; only cells
    holding an atom of either measure are visited.
    """
    u, w_eta, w_xi = _pooled_atoms(eta, xi, params)
    return _level_terms(u, w_eta, w_xi, params.max_level)


def dyadic_tail(p: float, m: int, max_level: int, mass: float = 1.0) -> float:
    """Majorant of the levels beyond ``max_level``.

    Each inner double sum over children of ``F`` is at most ``2 xi(F)``;
    ``mass`` is the xi-mass of the cells whose subtrees can still contribute.
    """
    return mass * cube_diameter(m) ** p * 2.0 ** (-p * max_level) / (2.0**p - 1.0)


def dyadic_bound(p: float, eta: EmpiricalMeasure, xi: EmpiricalMeasure, params: DyadicPartitionParams) -> float:
    """Upper bound on ``d_p^p(eta, xi)`` from the dyadic tree, truncated at ``max_level``.

    ``1/2 diam^p sum_{l<=L} 2^(-pl) S_l`` plus the tail majorant, in the
    units of the input (the unit-cube value times ``side^p``).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    u, w_eta, w_xi = _pooled_atoms(eta, xi, params)
    terms = _level_terms(u, w_eta, w_xi, params.max_level)
    levels = np.arange(params.max_level + 1)
    body = 0.5 * cube_diameter(eta.dim) ** p * float(np.sum(2.0 ** (-p * levels) * terms))
    mass = _unresolved_mass(u, w_xi, params.max_level + 1)
    return (body + dyadic_tail(p, eta.dim, params.max_level, mass)) * params.side**p


def deepest_valid_level(
    eta: EmpiricalMeasure, xi: EmpiricalMeasure, cap: int = 20, side: float = 1.0, origin=0.0
) -> int | None:
    """Largest ``L <= cap`` at which :func:`dyadic_bound` is defined, or ``None``."""
    best = None
    for level in range(cap + 1):
        try:
            dyadic_level_terms(eta, xi, DyadicPartitionParams(level, side, origin))
        except PreconditionError:
            break
        best = level
    return best


# -- variance of occupation counts -----------------------------------------


@dataclass(frozen=True)
class VarianceCheck:
    empirical_var: float
    bound: float
    xi_F: float
    c0: float
    passed: bool


def variance_bound_check(
    sampler: Callable[[int, np.random.Generator], np.ndarray],
    indicator: Callable[[np.ndarray], np.ndarray],
    n: int,
    t0: float,
    reps: int,
    seed: int,
    mixing_c: float,
    mixing_r0: float,
    presample: int = 200_000,
) -> VarianceCheck:
    """Monte Carlo variance of ``sum_i 1_F(U_i)`` against ``c0 n xi(F) / t0``.

    ``sampler(n, rng)`` returns ``n`` consecutive observations of a stationary
    process with ``alpha(k) <= mixing_c * k^-mixing_r0``; ``indicator`` maps
    observations to membership in ``F``.  ``xi(F)`` is estimated from a
    presample drawn with ``substream(seed, 0)``; repetition ``r`` uses
    ``substream(seed, 1, r)``.
    """
    if n < 1 or reps < 2:
        raise ValueError("need n >= 1 and reps >= 2")
    if not 0.0 < t0 <= 1.0:
        raise ValueError("t0 must lie in (0, 1]")
    xi_f = float(np.mean(indicator(sampler(presample, substream(seed, 0)))))
    if xi_f < t0:
        raise PreconditionError(f"xi(F) ~ {xi_f:.6g} is below t0 = {t0}")
    counts = np.array(
        [np.count_nonzero(indicator(sampler(n, substream(seed, 1, r)))) for r in range(reps)], dtype=np.float64
    )
    var = float(counts.var(ddof=1))
    c0 = default_c0(mixing_c, mixing_r0)
    bound = c0 * n * xi_f / t0
    return VarianceCheck(var, bound, xi_f, c0, var <= bound)


# -- expected-distance bounds -----------------------------------------------


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the expected-distance bounds.

    ``d`` is the dimension of the measure, ``K`` the truncation radius,
    ``M`` the cube-density constant (``xi(F) <= M vol(F)``), ``m_q`` the q-th
    moment and ``c0`` the mixing constant (see :func:`default_c0`).
    ``d_prime`` and ``m_q_prime`` describe the stationary segment case.
    """

    p: float
    q: float
    d: int
    n: int
    K: float = 1.0
    M: float = 1.0
    c0: float = C0_FLOOR
    r0: float | None = None
    m_q: float = 0.0
    d_prime: int | None = None
    m_q_prime: float | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _check_geometry(p: float, d: int, n: int, c0: float, strict_name: str = "p < d/2"):
    if p < 1:
        raise BoundDomainError(f"requires p >= 1 (got p={p})")
    if d < 1:
        raise BoundDomainError(f"requires d >= 1 (got d={d})")
    if p > d / 2:
        raise BoundDomainError(f"requires {strict_name}: p={p} > d/2={d / 2} makes the geometric factor diverge")
    if p == d / 2:
        raise BoundDomainError(f"requires {strict_name}: p = d/2 = {p} makes 1 - 2^(p - d/2) vanish")
    if n < 1:
        raise BoundDomainError(f"requires n >= 1 (got n={n})")
    if c0 <= 2:
        raise BoundDomainError(f"requires c0 > 2 (got c0={c0})")


def _density_factor(p: float, d: int, M: float) -> float:
    return (1.0 + M ** ((d / 2 - p) / d)) / (1.0 - 2.0 ** (p - d / 2)) + 1.0 / (1.0 - 2.0**-p) + 4.0 * M ** (1.0 / d)


def mixing_bound_core(p: float, d: int, n: int, c0: float, M: float) -> float:
    """``c0 n^(-(p-2)/(2d)) 2^(3d/2-p) diam^p (...)``: the unit-cube bound on ``E d_p^p``."""
    _check_geometry(p, d, n, c0)
    if M <= 0:
        raise BoundDomainError(f"requires M > 0 (got M={M})")
    return (
        c0
        * float(n) ** (-(p - 2) / (2 * d))
        * 2.0 ** (1.5 * d - p)
        * cube_diameter(d) ** p
        * _density_factor(p, d, M)
    )


def bound_alpha_mixing(bp: BoundParams, tail_prob: float | None = None) -> float:
    """Bound on ``E d_p^p(xi_n, xi)`` for a stationary alpha-mixing process on ``R^d``.

    ``tail_prob`` is ``xi(|u| >= K)``; when omitted the Markov bound
    ``min(1, m_q / K^q)`` is used.
    """
    p, q, d, K = bp.p, bp.q, bp.d, bp.K
    core = mixing_bound_core(p, d, bp.n, bp.c0, bp.M)
    if q <= p:
        raise BoundDomainError(f"requires q > p (got q={q}, p={p})")
    if K <= 0:
        raise BoundDomainError(f"requires K > 0 (got K={K})")
    if bp.m_q < 0:
        raise BoundDomainError("requires m_q >= 0")
    tail = min(1.0, bp.m_q / K**q) if tail_prob is None else tail_prob
    if not 0.0 <= tail <= 1.0:
        raise BoundDomainError(f"tail probability must lie in [0, 1], got {tail}")
    truncation = tail ** ((q - p) / q) * bp.m_q ** (p / q) + tail * K**p
    return 3.0 ** (p - 1) * (2.0**p * truncation + K ** (d / 2) * core)


def stationary_segment_terms(bp: BoundParams, c_prime: float) -> tuple[float, float]:
    """The two summands of the segment bound, with ``K = n^((p-2)/(2 d^2))`` substituted."""
    p, q, d, n = bp.p, bp.q, bp.d, bp.n
    _check_geometry(p, d, n, bp.c0)
    if q <= p:
        raise BoundDomainError(f"requires q > p (got q={q}, p={p})")
    if bp.d_prime is not None and not 1 <= bp.d_prime <= d:
        raise BoundDomainError(f"requires 1 <= d_prime <= d (got d_prime={bp.d_prime}, d={d})")
    if bp.m_q_prime is not None and not (math.isfinite(bp.m_q_prime) and bp.m_q_prime >= 0):
        raise BoundDomainError("requires a finite, nonnegative m_q_prime")
    if c_prime < 0:
        raise BoundDomainError("requires c_prime >= 0")
    if bp.M <= 0:
        raise BoundDomainError(f"requires M > 0 (got M={bp.M})")
    first = (
        6.0**p
        * bp.c0
        * 2.0 ** (1.5 * d - p)
        * cube_diameter(d) ** p
        * float(n) ** (-(p - 2) / (4 * d))
        * _density_factor(p, d, bp.M)
    )
    second = 6.0**p * 2.0 * c_prime * float(d) ** (1 + q / 2) * float(n) ** ((p - 2) * (p - q) / (2 * d * d))
    return first, second


def bound_stationary_segments(bp: BoundParams, c_prime: float) -> float:
    """Bound on ``E d_p^p`` when ``xi`` is the law of ``d_prime`` stationary observations (valid for ``n >= n0``)."""
    first, second = stationary_segment_terms(bp, c_prime)
    return first + second


def bound_phi_mixing(p: float, d: int, n: int, c0: float, diam: float | None = None) -> float:
    """``n^(-p/d) c0 2^(d+1) diam^p (1/(1 - 2^(p-d/2)) + 1/(1 - 2^-p))`` for phi-mixing data on the unit cube."""
    _check_geometry(p, d, n, c0)
    diam = cube_diameter(d) if diam is None else diam
    if diam <= 0:
        raise BoundDomainError("requires diam > 0")
    return (
        float(n) ** (-p / d)
        * c0
        * 2.0 ** (d + 1)
        * diam**p
        * (1.0 / (1.0 - 2.0 ** (p - d / 2)) + 1.0 / (1.0 - 2.0**-p))
    )


def expected_cost_mc(
    sampler: Callable[[int, np.random.Generator], np.ndarray],
    reference: EmpiricalMeasure,
    p: float,
    n: int,
    reps: int,
    seed: int,
    max_atoms: int = 4096,
) -> tuple[float, float]:
    """Monte Carlo ``E d_p^p(xi_n, reference)`` and its standard error.

    Repetition ``r`` draws its path of ``n`` observations from ``substream(seed, r)``.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    costs = np.array(
        [
            transport_cost(p, EmpiricalMeasure(sampler(n, substream(seed, r))), reference, max_atoms)
            for r in range(reps)
        ]
    )
    return float(costs.mean()), float(costs.std(ddof=1) / math.sqrt(reps))

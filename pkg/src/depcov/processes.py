"""Stationary test processes, dependence scenarios and Monte Carlo experiments.

Causal ARMA processes without common AR/MA roots whose innovations have a
Lebesgue density are absolutely regular with geometrically decaying
coefficients, so they satisfy the mixing assumptions of the bootstrap test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import signal, special, stats

from depcov._rng import derived_seed, ordered_map, substream
from depcov.bootstrap import BootstrapConfig, independence_test
from depcov.dcov import dcov_fast
from depcov.errors import InvalidSpecError
from depcov.series import PairedSample

ROOT_TOL = 1e-8


@dataclass(frozen=True)
class Innovation:
    """Innovation law: ``gaussian`` with standard deviation ``scale`` or ``uniform`` on ``[low, high]``."""

    kind: Literal["gaussian", "uniform"] = "gaussian"
    scale: float = 1.0
    low: float = -1.0
    high: float = 1.0

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "Innovation":
        return cls("gaussian", scale=sigma)

    @classmethod
    def uniform(cls, low: float, high: float) -> "Innovation":
        return cls("uniform", low=low, high=high)

    def problems(self) -> list[str]:
        if self.kind == "gaussian":
            return [] if self.scale > 0 else [f"gaussian innovation needs sigma > 0, got {self.scale}"]
        if self.kind == "uniform":
            return [] if self.low < self.high else [f"uniform innovation needs low < high, got [{self.low}, {self.high}]"]
        return [f"unknown innovation kind {self.kind!r}"]

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(0.0, self.scale, size)
        return rng.uniform(self.low, self.high, size)

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.scale}
        return {"kind": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class ArmaSpec:
    """``U_k = sum_i ar[i] U_{k-i} + sum_i ma[i] e_{k-i} + e_k``.

    ``burn_in=None`` means ``10 * (p + q + 1) + 100``.
    """

    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    innovation: Innovation = field(default_factory=Innovation)
    burn_in: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)

    @property
    def is_iid(self) -> bool:
        return not any(self.ar) and not any(self.ma)

    def effective_burn_in(self) -> int:
        return 10 * (self.p + self.q + 1) + 100 if self.burn_in is None else self.burn_in

    def to_dict(self) -> dict:
        return {
            "ar": list(self.ar),
            "ma": list(self.ma),
            "innovation": self.innovation.to_dict(),
            "burn_in": self.effective_burn_in(),
        }


def _inverse_roots(coefs: tuple[float, ...], sign: float) -> np.ndarray:
    # reciprocals z = 1/u of the roots of 1 + sign * sum_i c_i u^i, i.e. the roots of the
    # monic z^p + sign * sum_i c_i z^(p-i); np.roots uses companion-matrix eigenvalues and
    # the monic form cannot overflow when the leading coefficient is tiny
    c = [sign * v for v in coefs]
    while c and c[-1] == 0.0:
        c.pop()
    if not c:
        return np.empty(0, dtype=complex)
    return np.roots([1.0] + c)


def validate_arma(spec: ArmaSpec) -> ArmaSpec:
    """Check causality, the unit circle condition and absence of common roots.

    Raises :class:`InvalidSpecError` listing every violated condition.
    """
    problems = list(spec.innovation.problems())
    if spec.burn_in is not None and spec.burn_in < 0:
        problems.append("burn_in must be non-negative")
    if not all(np.isfinite(spec.ar)) or not all(np.isfinite(spec.ma)):
        problems.append("coefficients must be finite")
        raise InvalidSpecError(problems)
    ar_inv = _inverse_roots(spec.ar, -1.0)
    ma_inv = _inverse_roots(spec.ma, 1.0)
    for z in ar_inv:
        # |root| <= 1 + tol  <=>  |1/root| >= 1 / (1 + tol)
        if abs(z) >= 1.0 / (1.0 + ROOT_TOL):
            problems.append(f"AR polynomial has root {1 / z:.6g} inside or on the unit circle (|root| = {1 / abs(z):.6g})")
    for za in ar_inv[ar_inv != 0]:
        for zm in ma_inv[ma_inv != 0]:
            if abs(zm - za) < ROOT_TOL * abs(za) * abs(zm):
                problems.append(f"AR and MA polynomials share the root {1 / za:.6g}")
    if problems:
        raise InvalidSpecError(problems)
    return spec


def simulate_arma(spec: ArmaSpec, n: int, seed=0) -> np.ndarray:
    """``n`` values of the process after a discarded burn-in, started from zeros."""
    validate_arma(spec)
    if n < 1:
        raise ValueError("n must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    burn = spec.effective_burn_in()
    eps = spec.innovation.draw(rng, burn + n)
    if spec.is_iid:
        return eps[burn:]
    b = np.r_[1.0, spec.ma]
    a = np.r_[1.0, -np.asarray(spec.ar)]
    return signal.lfilter(b, a, eps)[burn:]


ScenarioKind = Literal["independent_pair", "linear_dependent", "cross_lag", "common_factor"]


@dataclass(frozen=True)
class Scenario:
    """How the paired sample is generated.

    * ``independent_pair``: X and Y simulated from disjoint substreams.
    * ``linear_dependent``: ``Y_k = kappa * X_k + V_k`` with ``V`` from ``y_process``.
    * ``cross_lag``: ``Y_k = X_{k-1}`` for an iid ``X``; each pair ``(X_k, Y_k)``
      is independent but the series are not.
    * ``common_factor``: a shared ``factor_process`` path times ``kappa`` is
      added to both series.
    """

    kind: ScenarioKind = "independent_pair"
    x_process: ArmaSpec = field(default_factory=ArmaSpec)
    y_process: ArmaSpec = field(default_factory=ArmaSpec)
    kappa: float = 0.0
    factor_process: ArmaSpec = field(default_factory=ArmaSpec)

    def validate(self) -> "Scenario":
        problems = []
        if self.kind not in ("independent_pair", "linear_dependent", "cross_lag", "common_factor"):
            problems.append(f"unknown scenario kind {self.kind!r}")
        for name in ("x_process", "y_process", "factor_process"):
            try:
                validate_arma(getattr(self, name))
            except InvalidSpecError as exc:
                problems.extend(f"{name}: {p}" for p in exc.problems)
        if self.kind == "cross_lag" and not self.x_process.is_iid:
            problems.append("cross_lag requires an iid x_process (no AR/MA terms)")
        if problems:
            raise InvalidSpecError(problems)
        return self

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "x_process": self.x_process.to_dict(), "y_process": self.y_process.to_dict()}
        if self.kind in ("linear_dependent", "common_factor"):
            out["kappa"] = self.kappa
        if self.kind == "common_factor":
            out["factor_process"] = self.factor_process.to_dict()
        return out


def make_scenario_sample(sc: Scenario, n: int, seed: int = 0) -> PairedSample:
    """Paired sample of length ``n``; X uses substream 0, Y 1, the factor 2."""
    sc.validate()
    if sc.kind == "cross_lag":
        u = simulate_arma(sc.x_process, n + 1, substream(seed, 0))
        return PairedSample(u[1:], u[:-1])
    x = simulate_arma(sc.x_process, n, substream(seed, 0))
    v = simulate_arma(sc.y_process, n, substream(seed, 1))
    if sc.kind == "independent_pair":
        return PairedSample(x, v)
    if sc.kind == "linear_dependent":
        return PairedSample(x, sc.kappa * x + v)
    f = simulate_arma(sc.factor_process, n, substream(seed, 2))
    return PairedSample(x + sc.kappa * f, v + sc.kappa * f)


@dataclass(frozen=True)
class ExperimentReport:
    scenario: dict
    n: int
    reps: int
    rejection_rate: float
    mean_stat: float
    config: dict
    seed: int
    wall_time: float
    statistics: tuple[float, ...] = field(default=(), repr=False)
    rejections: tuple[bool, ...] = field(default=(), repr=False)

    def to_dict(self, include_reps: bool = False) -> dict:
        out = {
            "scenario": self.scenario,
            "n": self.n,
            "reps": self.reps,
            "rejection_rate": self.rejection_rate,
            "mean_stat": self.mean_stat,
            "config": self.config,
            "seed": self.seed,
            "wall_time": self.wall_time,
        }
        if include_reps:
            out["statistics"] = list(self.statistics)
            out["rejections"] = list(self.rejections)
        return out


def size_power_experiment(
    sc: Scenario, n: int, reps: int, cfg: BootstrapConfig, seed: int = 0, threads: int | None = 1
) -> ExperimentReport:
    """Rejection frequency of :func:`independence_test` over ``reps`` fresh samples.

    Repetition ``r`` generates its sample with ``derived_seed(seed, r, 0)`` and
    bootstraps with ``base_seed = derived_seed(seed, r, 1)``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    sc.validate()
    start = time.perf_counter()

    def one(r: int):
        s = make_scenario_sample(sc, n, derived_seed(seed, r, 0))
        out = independence_test(s, cfg.with_seed(derived_seed(seed, r, 1)), threads=1)
        return out.statistic, out.reject

    results = ordered_map(one, range(reps), threads)
    statistics = tuple(float(s) for s, _ in results)
    rejections = tuple(bool(r) for _, r in results)
    return ExperimentReport(
        scenario=sc.to_dict(),
        n=n,
        reps=reps,
        rejection_rate=sum(rejections) / reps,
        mean_stat=float(np.mean(statistics)),
        config=cfg.to_dict(),
        seed=seed,
        wall_time=time.perf_counter() - start,
        statistics=statistics,
        rejections=rejections,
    )


def block_array_segment(spec: ArmaSpec, d: int, seed: int, k: int, side: int) -> np.ndarray:
    """Segment ``k`` of one side (0 = X, 1 = Y) of :func:`block_array_sample`."""
    return simulate_arma(spec, d, substream(seed, k, side))


def block_array_sample(x_spec: ArmaSpec, y_spec: ArmaSpec, n: int, d: int, seed: int = 0) -> PairedSample:
    """``N = n // d`` independent stationary length-``d`` segments, concatenated.

    X and Y are generated independently, so the result is a row of the
    triangular block array under the null hypothesis.
    """
    validate_arma(x_spec)
    validate_arma(y_spec)
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    N = n // d
    x = np.concatenate([block_array_segment(x_spec, d, seed, k, 0) for k in range(N)])
    y = np.concatenate([block_array_segment(y_spec, d, seed, k, 1) for k in range(N)])
    return PairedSample(x, y)


def compare_distributions(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_a - F_b|``."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    return float(stats.ks_2samp(a, b).statistic)


def ks_critical_value(n: int, m: int, level: float = 0.05) -> float:
    """Asymptotic two-sample KS critical value ``c(level) * sqrt((n + m) / (n m))``."""
    return float(special.kolmogi(level) * np.sqrt((n + m) / (n * m)))


def dcov_null_statistics(samples) -> np.ndarray:
    """``n * dcov`` for each sample of an iterable."""
    return np.array([s.n * dcov_fast(s).value for s in samples])


def block_array_experiment(
    x_spec: ArmaSpec, y_spec: ArmaSpec, n: int, d: int, reps: int, seed: int = 0, threads: int | None = 1
) -> tuple[np.ndarray, np.ndarray]:
    """``n * dcov`` over ``reps`` stationary samples and ``reps`` block-array samples.

    Stationary repetition ``r`` uses ``derived_seed(seed, r, 0)``; block-array
    repetition ``r`` uses ``derived_seed(seed, r, 1)``.
    """
    sc = Scenario("independent_pair", x_spec, y_spec)

    def stationary(r):
        s = make_scenario_sample(sc, n, derived_seed(seed, r, 0))
        return s.n * dcov_fast(s).value

    def blocked(r):
        s = block_array_sample(x_spec, y_spec, n, d, derived_seed(seed, r, 1))
        return s.n * dcov_fast(s).value

    a = np.array(ordered_map(stationary, range(reps), threads))
    b = np.array(ordered_map(blocked, range(reps), threads))
    return a, b


__all__ = [
    "ArmaSpec",
    "ExperimentReport",
    "Innovation",
    "Scenario",
    "block_array_experiment",
    "block_array_sample",
    "block_array_segment",
    "compare_distributions",
    "dcov_null_statistics",
    "ks_critical_value",
    "make_scenario_sample",
    "simulate_arma",
    "size_power_experiment",
    "validate_arma",
]

"""Fast invariant suite behind ``depcov selftest``.

Each check returns a pair of numbers that must agree (or be ordered) within
a tolerance.  ``perturb`` is added to the left-hand quantity of every check,
which lets the test suite verify that a corrupted computation is caught.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from depcov._rng import substream
from depcov.bootstrap import BootstrapConfig, independence_test
from depcov.dcov import block_vstatistic, dcov_fast, dcov_v_oracle, hoeffding_h1_estimate, kernel_h_sym
from depcov.series import PairedSample, partition_blocks
from depcov.wasserstein import (
    DyadicPartitionParams,
    EmpiricalMeasure,
    bound_phi_mixing,
    deepest_valid_level,
    dyadic_bound,
    transport_cost,
    w_exact_1d,
    w_exact_discrete,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _close(a: float, b: float, rtol: float = 1e-10) -> bool:
    return abs(a - b) <= rtol * (1.0 + abs(b))


def _random_sample(rng: np.random.Generator, n: int) -> PairedSample:
    return PairedSample(rng.normal(size=(n, rng.integers(1, 3))), rng.normal(size=(n, rng.integers(1, 3))))


def _oracle_equivalence(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 0)
    worst = 0.0
    for _ in range(20):
        s = _random_sample(rng, int(rng.integers(2, 9)))
        fast, slow = dcov_fast(s).value + perturb, dcov_v_oracle(s).value
        worst = max(worst, abs(fast - slow) / (1.0 + abs(slow)))
    return worst <= 1e-10, f"max relative gap {worst:.3g}"


def _block_identity(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 1)
    worst = 0.0
    for n, d in ((4, 2), (6, 3), (6, 2)):
        s = _random_sample(rng, n)
        p = partition_blocks(s, d)
        explicit, fast = block_vstatistic(p) + perturb, dcov_fast(p.prefix()).value
        worst = max(worst, abs(explicit - fast) / (1.0 + abs(fast)))
    return worst <= 1e-10, f"max relative gap {worst:.3g}"


def _kernel_symmetry(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 2)
    z = [(rng.normal(size=2), rng.normal(size=1)) for _ in range(6)]
    perm = [z[i] for i in rng.permutation(6)]
    a, b = kernel_h_sym(*z) + perturb, kernel_h_sym(*perm)
    return _close(a, b), f"h_sym {a:.12g} vs permuted {b:.12g}"


def _metric_axioms(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 3)
    a, b, c = (EmpiricalMeasure(rng.random((6, 2))) for _ in range(3))
    ab, ba = w_exact_discrete(1, a, b) + perturb, w_exact_discrete(1, b, a)
    ok = _close(ab, ba) and w_exact_discrete(1, a, a) + perturb == 0.0
    ok = ok and ab <= w_exact_discrete(1, a, c) + w_exact_discrete(1, c, b) + 1e-12
    u, v = EmpiricalMeasure(rng.normal(size=8)), EmpiricalMeasure(rng.normal(size=8))
    ok = ok and _close(w_exact_discrete(2, u, v) + perturb, w_exact_1d(2, u, v))
    return ok, f"d_1(a, b) = {ab:.12g}"


def _degeneracy(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 4)
    x_pool, y_pool = rng.normal(size=(2000, 1)), rng.normal(size=(2000, 1))
    worst = 0.0
    for k in range(3):
        z = (rng.normal(size=1), rng.normal(size=1))
        est, se = hoeffding_h1_estimate(z, x_pool, y_pool, m=4000, seed=k)
        worst = max(worst, abs(est + perturb) / se)
    return worst <= 4.0, f"max |estimate| / SE = {worst:.3g}"


def _dyadic_dominates(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 5)
    slack = math.inf
    for _ in range(5):
        eta = EmpiricalMeasure(rng.random((16, 2)))
        xi = EmpiricalMeasure(eta.atoms[rng.integers(0, 16, size=16)])
        level = deepest_valid_level(eta, xi, cap=12)
        bound = dyadic_bound(1, eta, xi, DyadicPartitionParams(level))
        slack = min(slack, bound - (transport_cost(1, eta, xi) + perturb))
    return slack >= -1e-12, f"min slack {slack:.3g}"


def _phi_example(perturb: float) -> tuple[bool, str]:
    value = bound_phi_mixing(1, 4, 16, 2.5, diam=2.0) + perturb
    return _close(value, 320.0, 1e-12), f"bound {value!r}"


def _thread_invariance(perturb: float) -> tuple[bool, str]:
    rng = substream(7, 6)
    s = PairedSample(rng.normal(size=64), rng.normal(size=64))
    cfg = BootstrapConfig(replicates=40, base_seed=11)
    one, two = independence_test(s, cfg, threads=1), independence_test(s, cfg, threads=2)
    ok = one.replicate_stats == two.replicate_stats and one.quantile + perturb == two.quantile
    return ok, f"quantile {one.quantile!r}"


CHECKS: dict[str, Callable[[float], tuple[bool, str]]] = {
    "dcov_oracle_equivalence": _oracle_equivalence,
    "block_kernel_identity": _block_identity,
    "kernel_symmetry": _kernel_symmetry,
    "wasserstein_metric_axioms": _metric_axioms,
    "first_projection_degenerate": _degeneracy,
    "dyadic_bound_dominates": _dyadic_dominates,
    "phi_bound_example": _phi_example,
    "bootstrap_thread_invariance": _thread_invariance,
}


def run_selftest(perturb: float = 0.0) -> list[CheckResult]:
    out = []
    for name, check in CHECKS.items():
        try:
            passed, detail = check(perturb)
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail))
    return out

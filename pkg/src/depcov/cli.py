"""``depcov`` command line: ``test``, ``simulate``, ``wbound`` and ``selftest``.

Reports are UTF-8 JSON on stdout, diagnostics go to stderr.  Exit codes:
0 success (for ``test``: independence not rejected), 1 usage or parameter
error, 2 data error, 3 independence rejected.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time

import numpy as np
import scipy

from depcov import __version__
from depcov._rng import resolve_threads
from depcov.bootstrap import BootstrapConfig, independence_test
from depcov.errors import BoundDomainError, DegenerateBootstrapError, InvalidSpecError, SampleError
from depcov.processes import ArmaSpec, Innovation, Scenario, size_power_experiment
from depcov.series import load_csv
from depcov.wasserstein.bounds import (
    BoundParams,
    bound_alpha_mixing,
    bound_phi_mixing,
    default_c0,
    mixing_bound_core,
    stationary_segment_terms,
)

SCHEMA_VERSION = "1.0"
SCHEMA_RESOURCE = "schemas/report.schema.json"
# conditions under which the bootstrap is valid; they cannot be checked from data
TEST_ASSUMPTIONS = (
    "both series are strictly stationary and absolutely regular with beta(k) = O(k^-r), r > 18",
    "moments of order 4 + delta are finite for some delta > 0",
)
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_REJECT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _versions() -> dict:
    import numba

    return {
        "depcov": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def load_schema() -> dict:
    """The JSON schema that every report validates against."""
    from importlib.resources import files

    return json.loads(files("depcov").joinpath(SCHEMA_RESOURCE).read_text(encoding="utf-8"))


def _report(verb: str, argv: list[str], config: dict, seed, results, start: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": {"verb": verb, "argv": list(argv)},
        "config": config,
        "seed": seed,
        "results": results,
        "versions": _versions(),
        "wall_time": time.perf_counter() - start,
    }


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2, allow_nan=False) + "\n")
    sys.stdout.flush()


def _bootstrap_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="block length floor(ln(n)^gamma), default 0.45")
    g.add_argument("--block-len", type=int, help="explicit block length")
    p.add_argument("--reps", type=int, default=200, help="bootstrap replicates B")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--vectorize", type=int, default=1, metavar="J", help="stack J consecutive observations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker threads (default: DEPCOV_THREADS or all CPUs)")


def _config_from(args, base_seed: int, vectorize: int | None = None) -> BootstrapConfig:
    gamma = 0.45 if args.gamma is None and args.block_len is None else args.gamma
    return BootstrapConfig(
        gamma=gamma,
        block_len=args.block_len,
        replicates=args.reps,
        alpha=args.alpha,
        base_seed=base_seed,
        vectorize_stride=args.vectorize if vectorize is None else vectorize,
    )


def _parse_floats(text: str | None) -> tuple[float, ...]:
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="depcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"depcov {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("test", help="block bootstrap independence test on a CSV sample")
    t.add_argument("--input", required=True, help="CSV with x columns followed by y columns")
    t.add_argument("--xdim", type=int, required=True)
    t.add_argument("--ydim", type=int, required=True)
    _bootstrap_flags(t)

    s = sub.add_parser("simulate", help="size/power experiment on a simulated scenario")
    s.add_argument(
        "--scenario",
        default="independent_pair",
        choices=["independent_pair", "linear_dependent", "cross_lag", "common_factor"],
    )
    s.add_argument("--n", type=int, required=True, help="sample length")
    s.add_argument("--experiment-reps", type=int, default=100, help="outer Monte Carlo repetitions")
    s.add_argument("--kappa", type=float, default=0.0)
    for side in ("x", "y", "factor"):
        s.add_argument(f"--{side}-ar", default="", help=f"AR coefficients of the {side} process, comma separated")
        s.add_argument(f"--{side}-ma", default="", help=f"MA coefficients of the {side} process")
    s.add_argument("--innovation", choices=["gaussian", "uniform"], default="gaussian")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--low", type=float, default=-1.0)
    s.add_argument("--high", type=float, default=1.0)
    s.add_argument("--burn-in", type=int)
    s.add_argument("--compare-vectorize", action="store_true", help="also run with J=1 and report both rates")
    s.add_argument("--emit-stats", metavar="PATH", help="write per-repetition statistics as CSV")
    _bootstrap_flags(s)

    w = sub.add_parser("wbound", help="evaluate an expected Wasserstein distance bound")
    w.add_argument("--variant", choices=["alpha", "stationary", "phi"], default="alpha")
    w.add_argument("--p", type=float, required=True)
    w.add_argument("--q", type=float)
    w.add_argument("--d", type=int, required=True, help="dimension of the measure")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--K", type=float, default=1.0, help="truncation radius")
    w.add_argument("--M", type=float, default=1.0, help="density constant")
    w.add_argument("--c0", type=float, help="mixing constant c0 > 2")
    w.add_argument("--mixing-c", type=float, help="prefactor c of alpha(k) <= c k^-r0 (derives c0)")
    w.add_argument("--r0", type=float, help="rate exponent r0 > 1")
    w.add_argument("--m-q", type=float, default=0.0, help="q-th moment")
    w.add_argument("--tail-prob", type=float, help="probability of leaving the radius-K ball")
    w.add_argument("--d-prime", type=int)
    w.add_argument("--m-q-prime", type=float)
    w.add_argument("--c-prime", type=float, default=0.0)
    w.add_argument("--diam", type=float, help="cube diameter (phi variant), default sqrt(d)")

    st = sub.add_parser("selftest", help="run the fast invariant suite")
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _threads(args) -> int:
    return resolve_threads(args.threads)


def cmd_test(args, argv, start) -> int:
    cfg = _config_from(args, args.seed)
    try:
        sample = load_csv(args.input, args.xdim, args.ydim)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_DATA
    outcome = independence_test(sample, cfg, threads=_threads(args))
    config = {
        "input": args.input,
        "xdim": args.xdim,
        "ydim": args.ydim,
        "n": sample.n,
        **cfg.to_dict(),
        "assumptions": list(TEST_ASSUMPTIONS),
    }
    _emit(_report("test", argv, config, args.seed, outcome.to_dict(), start))
    return EXIT_REJECT if outcome.reject else EXIT_OK


def _arma(args, side: str) -> ArmaSpec:
    if args.innovation == "gaussian":
        innovation = Innovation.gaussian(args.sigma)
    else:
        innovation = Innovation.uniform(args.low, args.high)
    return ArmaSpec(
        ar=_parse_floats(getattr(args, f"{side}_ar")),
        ma=_parse_floats(getattr(args, f"{side}_ma")),
        innovation=innovation,
        burn_in=args.burn_in,
    )


def cmd_simulate(args, argv, start) -> int:
    sc = Scenario(args.scenario, _arma(args, "x"), _arma(args, "y"), args.kappa, _arma(args, "factor")).validate()
    if args.experiment_reps < 1:
        raise UsageError("--experiment-reps must be >= 1")
    strides = [args.vectorize]
    if args.compare_vectorize:
        strides = sorted({1, max(args.vectorize, 2)})
    threads = _threads(args)
    runs = []
    for J in strides:
        cfg = _config_from(args, 0, vectorize=J)
        rep = size_power_experiment(sc, args.n, args.experiment_reps, cfg, seed=args.seed, threads=threads)
        runs.append(rep)
    results = {
        "scenario": sc.to_dict(),
        "n": args.n,
        "reps": args.experiment_reps,
        "runs": [
            {k: v for k, v in rep.to_dict(include_reps=True).items() if k not in ("wall_time", "scenario", "n", "reps")}
            for rep in runs
        ],
        "rejection_rates": {str(rep.config["vectorize_stride"]): rep.rejection_rate for rep in runs},
    }
    if args.emit_stats:
        with open(args.emit_stats, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "vectorize", "statistic", "reject"])
            for rep in runs:
                for r, (stat, rej) in enumerate(zip(rep.statistics, rep.rejections)):
                    writer.writerow([r, rep.config["vectorize_stride"], repr(stat), int(rej)])
    config = {k: v for k, v in vars(args).items() if k not in ("verb", "threads", "emit_stats")}
    _emit(_report("simulate", argv, config, args.seed, results, start))
    return EXIT_OK


def cmd_wbound(args, argv, start) -> int:
    if args.c0 is None:
        if args.mixing_c is None:
            raise UsageError("wbound needs --c0 or --mixing-c")
        c0 = default_c0(args.mixing_c, 2.0 if args.r0 is None else args.r0)
    else:
        c0 = args.c0
    if args.variant == "phi":
        value = bound_phi_mixing(args.p, args.d, args.n, c0, args.diam)
        results = {"variant": "phi", "bound": value, "c0": c0}
    else:
        if args.q is None:
            raise UsageError(f"--q is required for --variant {args.variant}")
        bp = BoundParams(
            p=args.p, q=args.q, d=args.d, n=args.n, K=args.K, M=args.M, c0=c0, r0=args.r0,
            m_q=args.m_q, d_prime=args.d_prime, m_q_prime=args.m_q_prime,
        )
        if args.variant == "alpha":
            value = bound_alpha_mixing(bp, args.tail_prob)
            results = {"variant": "alpha", "bound": value, "c0": c0,
                       "mathfrak_M_p": mixing_bound_core(bp.p, bp.d, bp.n, c0, bp.M)}
        else:
            first, second = stationary_segment_terms(bp, args.c_prime)
            results = {"variant": "stationary", "bound": first + second, "c0": c0, "terms": [first, second]}
    config = {k: v for k, v in vars(args).items() if k != "verb"}
    _emit(_report("wbound", argv, config, None, results, start))
    return EXIT_OK


def cmd_selftest(args, argv, start) -> int:
    from depcov.selftest import run_selftest

    checks = run_selftest(perturb=1e-3 if args.inject_fault else 0.0)
    passed = sum(c.passed for c in checks)
    results = {"passed": passed, "failed": len(checks) - passed, "checks": [c.to_dict() for c in checks]}
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}", file=sys.stderr)
    _emit(_report("selftest", argv, {"inject_fault": args.inject_fault}, None, results, start))
    return EXIT_OK if passed == len(checks) else EXIT_USAGE


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "wbound": cmd_wbound, "selftest": cmd_selftest}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.verb](args, argv, start)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundDomainError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidSpecError as exc:
        print("invalid scenario: " + "; ".join(exc.problems), file=sys.stderr)
        return EXIT_USAGE
    except (SampleError, DegenerateBootstrapError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

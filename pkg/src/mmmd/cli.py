"""Command-line entry point.

Exit codes: 0 success, 1 failed check, 2 usage or input error, 3 degenerate
statistic (the JSON result is still printed).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import harness
from .baselines import (PermutationPlan, block_mmd_test, cross_mmd_test, linear_mmd_test,
                        permutation_mmd_test)
from .datagen import GaussianMeanShift, GeneratorSpec, MultivariateT, StdGaussian
from .kernels import Family, Fixed, KernelSpec, MedianHeuristic, MinimaxGaussian
from .multikernel import mmmmd_test
from .statcore import PairedDataset, gamma_test, mmd_test

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3
PAIRED_ONLY = {"mmmd", "gamma", "mmmmd"}


class InputError(Exception):
    pass


def read_csv_matrix(path: str) -> np.ndarray:
    """Rows are observations, columns dimensions; a non-numeric first row is a header."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = [r for r in csv.reader(f) if r and any(c.strip() for c in r)]
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InputError(f"{path}: row {i + 1} has {len(r)} columns, expected {width}")
        try:
            out[i] = [float(c) for c in r]
        except ValueError as e:
            raise InputError(f"{path}: row {i + 1}: {e}") from e
    if not np.all(np.isfinite(out)):
        raise InputError(f"{path}: non-finite values")
    return out


def _bandwidth_rule(value: str, beta: float | None, n: int, d: int):
    if value == "median":
        return MedianHeuristic()
    if value == "minimax":
        if beta is None:
            raise InputError("--bandwidth minimax requires --beta")
        return MinimaxGaussian(beta, n, d)
    try:
        return Fixed(float(value))
    except ValueError as e:
        raise InputError(f"invalid bandwidth {value!r}: {e}") from e


def _kernel_list(text: str, base: str) -> list[KernelSpec]:
    specs = []
    for item in text.split(","):
        fam, _, mult = item.strip().partition(":")
        try:
            family = Family(fam)
            m = float(mult) if mult else 1.0
        except ValueError as e:
            raise InputError(f"invalid kernel entry {item!r}") from e
        if base == "median":
            specs.append(KernelSpec(family, MedianHeuristic(m)))
        else:
            specs.append(KernelSpec(family, Fixed(m * float(base))))
    return specs


def _dump(obj) -> str:
    # json uses repr for floats: shortest string that round-trips exactly
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, list):
            return [clean(x) for x in v]
        return v
    return json.dumps(clean(obj), sort_keys=True)


def run_test(args) -> int:
    x, y = read_csv_matrix(args.x), read_csv_matrix(args.y)
    if x.shape[1] != y.shape[1]:
        raise InputError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]} columns")
    if x.shape[0] != y.shape[0]:
        if args.method in PAIRED_ONLY:
            raise InputError(f"{args.method} needs equal sample sizes ({x.shape[0]} vs {y.shape[0]})")
        m = min(x.shape[0], y.shape[0])
        x, y = x[:m], y[:m]
    try:
        data = PairedDataset(x, y)
    except ValueError as e:
        raise InputError(str(e)) from e
    if args.shuffle_seed is not None:
        data = data.shuffled(args.shuffle_seed)
    n, d = data.n, data.d
    start = time.perf_counter_ns()
    try:
        if args.method == "mmmmd":
            specs = _kernel_list(args.kernels or "gaussian:1,gaussian:2,gaussian:4", args.bandwidth_base)
            out = mmmmd_test(data, specs, args.alpha)
        else:
            spec = KernelSpec(Family(args.kernel), _bandwidth_rule(args.bandwidth, args.beta, n, d))
            if args.method == "mmmd":
                out = mmd_test(data, spec, args.alpha)
            elif args.method == "gamma":
                out = gamma_test(data, spec, args.gamma, args.alpha)
            elif args.method == "mmd-perm":
                out = permutation_mmd_test(data, spec, PermutationPlan(args.num_perms, args.seed), args.alpha)
            elif args.method == "block":
                out = block_mmd_test(data, spec, args.block_size, args.alpha)
            elif args.method == "linear":
                out = linear_mmd_test(data, spec, args.alpha)
            else:
                out = cross_mmd_test(data, spec, args.alpha)
    except ValueError as e:
        raise InputError(str(e)) from e
    result = {
        "method": args.method, "n": n, "d": d,
        "statistic": out.statistic, "threshold": out.threshold, "p_value": out.p_value,
        "reject": out.reject, "degenerate": out.degenerate, "alpha": out.alpha,
        "bandwidth": out.diagnostics.get("bandwidth"), "seed": args.seed,
        "runtime_ns": time.perf_counter_ns() - start,
    }
    if args.method == "mmmmd":
        result["r"] = out.diagnostics["r"]
    if args.method == "gamma":
        result["gamma"] = args.gamma
    print(_dump(result))
    return EXIT_DEGENERATE if out.degenerate else EXIT_OK


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MMD_THREADS")
    try:
        return int(env) if env else 1
    except ValueError:
        raise InputError(f"MMD_THREADS must be an integer, got {env!r}")


def _experiment_config(args, default_methods: list[str]) -> harness.ExperimentConfig:
    overrides = {"threads": _threads(args)}
    if args.out:
        overrides["output_path"] = args.out
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as f:
                cfg = harness.ExperimentConfig.from_dict({**json.load(f), **overrides})
            return cfg
        if args.preset:
            return harness.preset(args.preset, **overrides)
        if args.command == "simulate-null":
            variant = MultivariateT(args.d, args.df) if args.data == "t" else StdGaussian(args.d)
        else:
            variant = GaussianMeanShift(args.d, args.j, args.eps)
        grid = [int(v) for v in args.n_grid.split(",")] if getattr(args, "n_grid", None) else [args.n]
        methods = args.methods.split(",") if args.methods else default_methods
        return harness.ExperimentConfig(
            generator=GeneratorSpec(variant, grid[0]), n_grid=grid, methods=methods, reps=args.reps,
            alpha=args.alpha, seed=args.seed, kernel=args.kernel, bandwidth=args.bandwidth,
            num_perms=args.num_perms, **overrides)
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"invalid experiment configuration: {e}") from e


def run_experiment(args) -> int:
    if args.command == "check":
        return run_check(args)
    default = {"simulate-null": ["mmmd"], "power": ["mmmd", "cross", "block", "linear", "mmd-perm"],
               "bench": ["mmmd", "mmd-perm"]}[args.command]
    config = _experiment_config(args, default)
    if config.output_path:
        try:
            os.makedirs(config.output_path, exist_ok=True)
        except OSError as e:
            raise InputError(f"cannot create output directory: {e}") from e
    driver = {"simulate-null": harness.simulate_null, "power": harness.power_curve,
              "bench": harness.runtime_bench}[args.command]
    try:
        report = driver(config)
    except ValueError as e:
        raise InputError(str(e)) from e
    for r in report.records:
        line = f"{r.method:<12} n={r.n:<6} d={r.d:<4} rate={r.rejection_rate:.4f} mean_stat={r.mean_statistic:.4f}"
        if r.ks_distance is not None:
            line += f" ks={r.ks_distance:.4f}"
        if r.mean_runtime_ns is not None:
            line += f" time_ms={r.mean_runtime_ns / 1e6:.2f}"
        print(line)
    return EXIT_OK


def run_check(args) -> int:
    if args.check == "sn-limit":
        s = harness.sn_limit_check(args.n)
        ok = abs(s - 5.0) <= args.tol
        print(_dump({"check": "sn-limit", "n": args.n, "s_n": s, "tol": args.tol, "pass": ok}))
        return EXIT_OK if ok else EXIT_CHECK_FAILED
    from .kernels import ResolvedKernel

    k = ResolvedKernel(Family.LINEAR) if args.kernel == "linear" else ResolvedKernel(Family(args.kernel), args.lam)
    gen = GeneratorSpec(GaussianMeanShift(1, 1, args.shift), args.n)
    res = harness.alt_variance_check(gen, k, args.n, args.reps, args.aux_m, args.seed)
    ok = 0.7 <= res.ratio <= 1.3
    print(_dump({"check": "alt-variance", "ratio": res.ratio, "empirical_var": res.empirical_var,
                 "var_h_hat": res.var_h_hat, "mmd_sq_hat": res.mmd_sq_hat, "reliable": res.reliable,
                 "pass": ok}))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmmd", description="Martingale MMD two-sample tests.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run a two-sample test on CSV data")
    t.add_argument("--x", required=True)
    t.add_argument("--y", required=True)
    t.add_argument("--method", default="mmmd", choices=["mmmd", "gamma", "mmmmd", "mmd-perm", "block", "linear", "cross"])
    t.add_argument("--kernel", default="gaussian", choices=[f.value for f in Family])
    t.add_argument("--bandwidth", default="median", help="'median', 'minimax' or a positive number")
    t.add_argument("--beta", type=float, help="smoothness for --bandwidth minimax")
    t.add_argument("--kernels", help="mmmmd kernel list, e.g. gaussian:1,gaussian:2,gaussian:4")
    t.add_argument("--bandwidth-base", default="median", help="base bandwidth the --kernels multipliers scale")
    t.add_argument("--gamma", type=float, default=None)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--seed", type=int, default=0, help="permutation seed")
    t.add_argument("--shuffle-seed", type=int, default=None, help="reorder pairs before testing")
    t.add_argument("--num-perms", type=int, default=200)
    t.add_argument("--block-size", type=int, default=None)

    for name in ("simulate-null", "power", "bench"):
        e = sub.add_parser(name)
        src = e.add_mutually_exclusive_group()
        src.add_argument("--config", help="JSON experiment configuration")
        src.add_argument("--preset", choices=harness.PRESETS)
        e.add_argument("--n", type=int, default=200)
        e.add_argument("--n-grid", help="comma-separated sample sizes")
        e.add_argument("--d", type=int, default=10)
        e.add_argument("--kernel", default="gaussian", choices=[f.value for f in Family])
        e.add_argument("--bandwidth", default="median")
        e.add_argument("--methods", help="comma-separated method list, e.g. mmmd,gamma:0.5,cross")
        e.add_argument("--reps", type=int, default=200 if name != "bench" else 5)
        e.add_argument("--alpha", type=float, default=0.05)
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--num-perms", type=int, default=200)
        e.add_argument("--out", help="output directory for records.csv / statistics.csv / summary.json")
        e.add_argument("--threads", type=int, default=None)
        if name == "simulate-null":
            e.add_argument("--data", choices=["gaussian", "t"], default="gaussian")
            e.add_argument("--df", type=float, default=10.0)
        else:
            e.add_argument("--j", type=int, default=5)
            e.add_argument("--eps", type=float, default=0.3)

    c = sub.add_parser("check", help="numeric checks")
    csub = c.add_subparsers(dest="check", required=True)
    s = csub.add_parser("sn-limit")
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--tol", type=float, default=0.05)
    a = csub.add_parser("alt-variance")
    a.add_argument("--kernel", choices=["linear", "gaussian"], default="linear")
    a.add_argument("--lam", type=float, default=1.0)
    a.add_argument("--shift", type=float, default=0.5)
    a.add_argument("--n", type=int, default=2000)
    a.add_argument("--reps", type=int, default=1000)
    a.add_argument("--aux-m", type=int, default=5000)
    a.add_argument("--seed", type=int, default=0)
    return p


def _validate(args, parser) -> None:
    if args.command == "test":
        if args.kernels is not None and args.method != "mmmmd":
            parser.error("--kernels is only valid with --method mmmmd")
        if args.method == "gamma":
            if args.gamma is None:
                parser.error("--method gamma requires --gamma")
            if not 0 <= args.gamma <= 1:
                parser.error("--gamma must lie in [0, 1]")
        elif args.gamma is not None:
            parser.error("--gamma is only valid with --method gamma")
        if args.bandwidth == "minimax" and args.kernel != "gaussian":
            parser.error("--bandwidth minimax requires --kernel gaussian")
    if hasattr(args, "alpha") and not 0 < args.alpha < 1:
        parser.error("--alpha must lie in (0, 1)")
    if getattr(args, "reps", 1) < 1 or getattr(args, "num_perms", 1) < 1:
        parser.error("--reps and --num-perms must be >= 1")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be >= 1")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "test":
            return run_test(args)
        return run_experiment(args)
    except InputError as e:
        print(f"mmmd: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

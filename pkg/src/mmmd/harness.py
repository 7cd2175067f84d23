"""Monte-Carlo drivers: null distributions, power curves, runtime and numeric checks.

Replication ``r`` at the ``c``-th entry of the sample-size grid uses the data
seed ``split_seed(seed, c * reps + r)``. All methods at a grid point see the
same datasets, and any single replication can be re-run in isolation.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baselines import (PermutationPlan, block_mmd_test, cross_mmd_test, linear_mmd_test,
                        permutation_mmd_test)
from .datagen import (ArCovScale, GaussianMeanShift, GeneratorSpec, MultivariateT, StdGaussian,
                      generate, split_seed)
from .distfn import ks_distance
from .kernels import Family, Fixed, KernelSpec, MedianHeuristic, ResolvedKernel, resolve_bandwidth
from .multikernel import mixed_ensemble, mmmmd_test
from .statcore import (PairedDataset, TestOutcome, compute_mmd_breakdown, estimate_h_moments, gamma_test,
                       mmd_test)

log = logging.getLogger(__name__)

METHODS = ("mmmd", "gamma", "mmmmd", "mmmmd-mixed", "mmd-perm", "block", "linear", "cross")


@dataclass
class ExperimentConfig:
    generator: GeneratorSpec
    n_grid: list[int]
    methods: list[str] = field(default_factory=lambda: ["mmmd"])
    reps: int = 100
    alpha: float = 0.05
    seed: int = 0
    kernel: str = "gaussian"
    bandwidth: str | float = "median"
    num_perms: int = 200
    multipliers: tuple[float, ...] = (1.0, 2.0, 4.0)
    output_path: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.n_grid or list(self.n_grid) != sorted(self.n_grid):
            raise ValueError("n_grid must be nonempty and ascending")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        for m in self.methods:
            parse_method(m)
        Family(self.kernel)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator"] = self.generator.to_dict()
        d["multipliers"] = list(self.multipliers)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["generator"] = GeneratorSpec.from_dict(d["generator"])
        if "multipliers" in d:
            d["multipliers"] = tuple(d["multipliers"])
        return cls(**d)


@dataclass
class CellRecord:
    method: str
    n: int
    d: int
    rejection_rate: float
    mean_statistic: float
    ks_distance: float | None = None
    mean_runtime_ns: float | None = None
    degenerate_count: int = 0


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[CellRecord]
    statistics: dict = field(default_factory=dict)  # (method, n) -> list of statistics
    warnings: list[str] = field(default_factory=list)

    def record(self, method: str, n: int) -> CellRecord:
        return next(r for r in self.records if r.method == method and r.n == n)

    def write(self, out_dir: str | os.PathLike) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cols = list(CellRecord.__dataclass_fields__)
        with open(out / "records.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(cols)
            for r in self.records:
                w.writerow(_fmt(getattr(r, c)) for c in cols)
        if self.statistics:
            with open(out / "statistics.csv", "w", newline="", encoding="utf-8") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(["method", "n", "rep", "statistic"])
                for (m, n), vals in self.statistics.items():
                    for rep, v in enumerate(vals):
                        w.writerow([m, n, rep, _fmt(v)])
        # run-location fields are excluded so reruns elsewhere produce identical files
        cfg = {k: v for k, v in self.config.to_dict().items() if k not in ("output_path", "threads")}
        summary = {"config": cfg,
                   "records": [asdict(r) for r in self.records],
                   "warnings": self.warnings}
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_method(desc: str) -> tuple[str, dict]:
    """``"gamma:0.5"`` -> ``("gamma", {"gamma": 0.5})``; ``"block:20"`` sets the block size."""
    name, _, arg = desc.partition(":")
    if name not in METHODS:
        raise ValueError(f"unknown method {desc!r}; choose from {', '.join(METHODS)}")
    params: dict = {}
    if name == "gamma":
        params["gamma"] = float(arg) if arg else 0.5
    elif name == "block" and arg:
        params["block_size"] = int(arg)
    elif arg:
        raise ValueError(f"method {name} takes no argument")
    return name, params


def _base_kernel(config: ExperimentConfig, data: PairedDataset) -> ResolvedKernel:
    if config.bandwidth == "median":
        spec = KernelSpec(Family(config.kernel), MedianHeuristic())
    else:
        spec = KernelSpec(Family(config.kernel), Fixed(float(config.bandwidth)))
    return resolve_bandwidth(spec, data.x, data.y)


def run_method(desc: str, data: PairedDataset, config: ExperimentConfig, data_seed: int,
               base: ResolvedKernel | None = None) -> TestOutcome:
    name, params = parse_method(desc)
    k = base if base is not None else _base_kernel(config, data)
    a = config.alpha
    if name == "mmmd":
        return mmd_test(data, k, a)
    if name == "gamma":
        return gamma_test(data, k, params["gamma"], a)
    if name == "mmmmd":
        return mmmmd_test(data, [ResolvedKernel(k.family, m * k.lam) for m in config.multipliers], a)
    if name == "mmmmd-mixed":
        if config.bandwidth == "median":
            return mmmmd_test(data, mixed_ensemble(), a)
        lam = float(config.bandwidth)
        return mmmmd_test(data, [ResolvedKernel(Family.GAUSSIAN, lam), ResolvedKernel(Family.LAPLACE, lam)], a)
    if name == "mmd-perm":
        return permutation_mmd_test(data, k, PermutationPlan(config.num_perms, split_seed(data_seed, 1)), a)
    if name == "block":
        return block_mmd_test(data, k, params.get("block_size"), a)
    if name == "linear":
        return linear_mmd_test(data, k, a)
    return cross_mmd_test(data, k, a)


def _one_rep(args) -> list[tuple[float, bool, bool, int]]:
    config, n, data_seed = args
    data = generate(config.generator.with_(n=n, seed=data_seed))
    base = _base_kernel(config, data)
    out = []
    for m in config.methods:
        o = run_method(m, data, config, data_seed, base)
        out.append((o.statistic, o.reject, o.degenerate, o.diagnostics.get("runtime_ns", 0)))
    return out


def _run_cells(config: ExperimentConfig, keep_statistics: bool, ks: bool, timing: bool) -> ExperimentReport:
    records, stats = [], {}
    threads = max(1, int(config.threads))
    pool = ProcessPoolExecutor(threads) if threads > 1 else None
    try:
        for c, n in enumerate(config.n_grid):
            jobs = [(config, n, split_seed(config.seed, c * config.reps + r)) for r in range(config.reps)]
            results = list(pool.map(_one_rep, jobs, chunksize=8) if pool else map(_one_rep, jobs))
            for mi, m in enumerate(config.methods):
                vals = np.array([res[mi][0] for res in results])
                rejects = sum(res[mi][1] for res in results)
                degen = sum(res[mi][2] for res in results)
                live = np.array([not res[mi][2] for res in results])
                rec = CellRecord(
                    method=m, n=n, d=config.generator.variant.d,
                    rejection_rate=rejects / config.reps,
                    mean_statistic=float(vals.mean()),
                    ks_distance=ks_distance(vals[live]) if ks and live.any() else None,
                    mean_runtime_ns=float(np.mean([res[mi][3] for res in results])) if timing else None,
                    degenerate_count=int(degen),
                )
                records.append(rec)
                if keep_statistics:
                    stats[(m, n)] = vals.tolist()
                log.info("%s n=%d rate=%.4f", m, n, rec.rejection_rate)
    finally:
        if pool:
            pool.shutdown()
    return ExperimentReport(config, records, stats)


def simulate_null(config: ExperimentConfig) -> ExperimentReport:
    """Type-I error rates, KS distance of statistics to N(0, 1), and raw statistics."""
    if not getattr(config.generator.variant, "is_null", False):
        raise ValueError("simulate_null needs a generator with P = Q")
    report = _run_cells(config, keep_statistics=True, ks=True, timing=False)
    if config.output_path:
        report.write(config.output_path)
    return report


def power_curve(config: ExperimentConfig) -> ExperimentReport:
    report = _run_cells(config, keep_statistics=False, ks=False, timing=False)
    if config.output_path:
        report.write(config.output_path)
    return report


def runtime_bench(config: ExperimentConfig) -> ExperimentReport:
    """Median single-threaded wall time per method and sample size.

    Each timing covers the full test, bandwidth selection included.
    """
    records, stats = [], {}
    for c, n in enumerate(config.n_grid):
        times = {m: [] for m in config.methods}
        values = {m: [] for m in config.methods}
        rejects = {m: 0 for m in config.methods}
        for r in range(config.reps):
            data_seed = split_seed(config.seed, c * config.reps + r)
            data = generate(config.generator.with_(n=n, seed=data_seed))
            for m in config.methods:
                t0 = time.perf_counter_ns()
                o = run_method(m, data, config, data_seed)
                times[m].append(time.perf_counter_ns() - t0)
                values[m].append(o.statistic)
                rejects[m] += o.reject
        for m in config.methods:
            records.append(CellRecord(m, n, config.generator.variant.d, rejects[m] / config.reps,
                                      float(np.mean(values[m])), None, float(np.median(times[m]))))
            stats[(m, n)] = values[m]
    report = ExperimentReport(config, records, stats)
    if config.output_path:
        report.write(config.output_path)
    return report


@dataclass
class AltVarianceResult:
    ratio: float
    empirical_var: float  # Var over reps of sqrt(n) * T_n
    var_h_hat: float
    mmd_sq_hat: float
    reliable: bool
    warnings: list[str] = field(default_factory=list)


def alt_variance_check(gen: GeneratorSpec, k: ResolvedKernel, n: int, reps: int, aux_m: int,
                       seed: int = 0) -> AltVarianceResult:
    """Compare Var(sqrt(n) (T_n - MMD^2)) across replications with 5 Var h(Z).

    ``MMD^2`` and ``Var h`` are estimated on an independent auxiliary sample of
    size ``aux_m``; the ratio should approach one for large n.
    """
    if getattr(gen.variant, "is_null", False):
        raise ValueError("alt_variance_check needs an alternative (P != Q)")
    aux = generate(gen.with_(n=aux_m, seed=split_seed(seed, reps)))
    moments = estimate_h_moments(aux, k)
    if not moments["var_h_hat"] > 0:
        raise ValueError("estimated Var h(Z) is zero")
    t = np.array([
        compute_mmd_breakdown(generate(gen.with_(n=n, seed=split_seed(seed, r))), k).t_n
        for r in range(reps)
    ])
    centred = math.sqrt(n) * (t - moments["mmd_sq_hat"])
    emp = float(np.var(centred, ddof=1)) if reps > 1 else math.nan
    notes = []
    reliable = reps >= 100
    if not reliable:
        notes.append(f"only {reps} replications; variance ratio is unreliable")
        warnings.warn(notes[-1], stacklevel=2)
    return AltVarianceResult(emp / (5.0 * moments["var_h_hat"]), emp, moments["var_h_hat"],
                             moments["mmd_sq_hat"], reliable, notes)


def sn_limit_check(n: int) -> float:
    """S_n = (1/n)[sum a_i^2 + 2 sum a_i t_i + sum t_i^2], a_i = (i-1)/i, t_i = sum_{j>i} 1/j.

    S_n tends to 5, the variance inflation of the mMMD statistic under a fixed
    alternative.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    i = np.arange(1, n + 1, dtype=float)
    a = (i - 1.0) / i
    inv = 1.0 / i
    tail = np.zeros(n)
    tail[:-1] = np.cumsum(inv[::-1])[::-1][1:]
    terms = a * a + 2.0 * a * tail + tail * tail
    return math.fsum(terms.tolist()) / n


# Configurations from the experiments, at desk scale.
def preset(name: str, **overrides) -> ExperimentConfig:
    grid = [100, 200, 300, 400, 500]
    power_methods = ["mmmd", "cross", "block", "linear", "mmd-perm"]
    table = {
        "null-gauss-d10": dict(generator=GeneratorSpec(StdGaussian(10), 200), n_grid=[200], reps=2000),
        "null-t-d10": dict(generator=GeneratorSpec(MultivariateT(10, 10.0), 200), n_grid=[200], reps=2000),
        "null-gauss-d250": dict(generator=GeneratorSpec(StdGaussian(250), 200), n_grid=[200], reps=2000),
        "power-10-5-0.3": dict(generator=GeneratorSpec(GaussianMeanShift(10, 5, 0.3), 100), n_grid=grid,
                               methods=power_methods, reps=500),
        # the text and the figure caption disagree on eps for d = 50; both are provided
        "power-50-5-0.3": dict(generator=GeneratorSpec(GaussianMeanShift(50, 5, 0.3), 100), n_grid=grid,
                               methods=power_methods, reps=500),
        "power-50-5-0.4": dict(generator=GeneratorSpec(GaussianMeanShift(50, 5, 0.4), 100), n_grid=grid,
                               methods=power_methods, reps=500),
        "power-100-5-0.5": dict(generator=GeneratorSpec(GaussianMeanShift(100, 5, 0.5), 100), n_grid=grid,
                                methods=power_methods, reps=500),
        "mmmmd-cov": dict(generator=GeneratorSpec(ArCovScale(10, 0.5, 1.3), 100), n_grid=grid,
                          methods=["mmmd", "mmmmd", "mmmmd-mixed"], reps=500),
        "mmmmd-null": dict(generator=GeneratorSpec(StdGaussian(10), 200), n_grid=[200], methods=["mmmmd"],
                           reps=2000),
    }
    if name not in table:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(table)}")
    return ExperimentConfig(**{**table[name], **overrides})


PRESETS = ("null-gauss-d10", "null-t-d10", "null-gauss-d250", "power-10-5-0.3", "power-50-5-0.3",
           "power-50-5-0.4", "power-100-5-0.5", "mmmmd-cov", "mmmmd-null")

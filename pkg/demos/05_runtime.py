"""
Cost of calibration
===================

mMMD evaluates each pair once. The permutation test repeats a quadratic-time
evaluation for every relabelling.
"""

# %%
from mmmd import ExperimentConfig, GaussianMeanShift, GeneratorSpec, runtime_bench

cfg = ExperimentConfig(generator=GeneratorSpec(GaussianMeanShift(10, 5, 0.3), 250), n_grid=[250, 500, 1000],
                       methods=["mmmd", "mmd-perm"], reps=3, num_perms=200)
report = runtime_bench(cfg)

# %%
for n in cfg.n_grid:
    a, b = report.record("mmmd", n).mean_runtime_ns, report.record("mmd-perm", n).mean_runtime_ns
    print(f"n={n:5d}  mMMD {a / 1e6:7.1f} ms   permutation {b / 1e6:8.1f} ms   ratio {a / b:.3f}")

"""
Power against a mean shift
==========================

Five tests on the same datasets: the first five coordinates of Y are shifted
by 0.3 in ten dimensions.
"""

# %%
from mmmd import preset, power_curve

cfg = preset("power-10-5-0.3", n_grid=[100, 300], reps=50, num_perms=100, seed=2)
report = power_curve(cfg)

# %%
for n in cfg.n_grid:
    row = "  ".join(f"{m}={report.record(m, n).rejection_rate:.2f}" for m in cfg.methods)
    print(f"n={n}: {row}")

"""
Interpolating towards the quadratic statistic
=============================================

The weight exponent gamma moves from the quadratic-time estimator (0) to
mMMD (1). Every member stays self-normalized.
"""

# %%
from mmmd import Family, GaussianMeanShift, GeneratorSpec, KernelSpec, MedianHeuristic, gamma_test, generate

data = generate(GeneratorSpec(GaussianMeanShift(10, 5, 0.3), 300, seed=4))
spec = KernelSpec(Family.GAUSSIAN, MedianHeuristic())
for g in (0.0, 0.25, 0.5, 0.75, 1.0):
    out = gamma_test(data, spec, g)
    print(f"gamma={g:.2f}  statistic={out.statistic:+.3f}  reject={out.reject}")

# %%
# gamma = 1 is the mMMD test itself.
print(gamma_test(data, spec, 1.0).method)

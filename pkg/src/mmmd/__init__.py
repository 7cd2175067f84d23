"""Martingale MMD two-sample tests with Gaussian and chi-square calibration."""

from .baselines import (PermutationPlan, block_mmd_test, cross_mmd_test, linear_mmd_test, permutation_mmd_test,
                        quad_mmd_statistic)
from .datagen import (ArCovScale, GaussianMeanShift, GeneratorSpec, MultivariateT, StdGaussian, generate,
                      split_seed)
from .distfn import chi2_cdf, chi2_quantile, chi2_sf, ks_distance, std_normal_cdf, std_normal_quantile
from .harness import (ExperimentConfig, ExperimentReport, alt_variance_check, power_curve, preset, runtime_bench,
                      simulate_null, sn_limit_check)
from .kernels import (Family, Fixed, KernelSpec, MedianHeuristic, MinimaxGaussian, ResolvedKernel, eval_H,
                      eval_kernel, median_heuristic, median_metric, resolve_bandwidth)
from .multikernel import bandwidth_ensemble, compute_mmmmd, mixed_ensemble, mmmmd_test
from .statcore import (PairedDataset, TestOutcome, compute_gamma_statistic, compute_mmd_breakdown,
                       estimate_h_moments, gamma_test, mmd_test)

__version__ = "0.1.0"

import math

import numpy as np
import pytest

import oracles
from mmmd.baselines import (PermutationPlan, block_mmd_test, block_statistics, cross_mmd_test, cross_u,
                            linear_h, linear_mmd_test, permutation_mmd_test, quad_mmd_statistic)
from mmmd.datagen import GeneratorSpec, StdGaussian, generate, split_seed
from mmmd.kernels import Family, KernelSpec, MedianHeuristic, ResolvedKernel
from mmmd.statcore import PairedDataset, compute_gamma_statistic

LINEAR = ResolvedKernel(Family.LINEAR)
GAUSS = ResolvedKernel(Family.GAUSSIAN, 1.5)
MEDIAN = KernelSpec(Family.GAUSSIAN, MedianHeuristic())
ONE_D = PairedDataset([[1.0], [2.0], [3.0], [4.0]], [[0.0]] * 4)


def _rate(test, n, reps, seed, d=5):
    hits = 0
    for r in range(reps):
        hits += test(generate(GeneratorSpec(StdGaussian(d), n, split_seed(seed, r)))).reject
    return hits / reps


def test_quad_statistic_hand_value():
    data = PairedDataset([[1.0], [2.0], [3.0]], [[0.0]] * 3)
    assert quad_mmd_statistic(data, LINEAR) == pytest.approx(22 / 9, rel=1e-15)


def test_quad_statistic_equals_twice_gamma_zero(rng):
    data = PairedDataset(rng.standard_normal((40, 3)), rng.standard_normal((40, 3)) + 0.2)
    for k in (GAUSS, LINEAR, ResolvedKernel(Family.LAPLACE, 2.0)):
        q = quad_mmd_statistic(data, k)
        assert q == pytest.approx(2 * compute_gamma_statistic(data, k, 0.0).t_n_gamma, rel=1e-12)
        assert q == pytest.approx(oracles.quad_mmd(k.family.value, k.lam, data.x.tolist(), data.y.tolist()),
                                  rel=1e-12)


def test_quad_statistic_zero_for_identical_pairs(rng):
    x = rng.standard_normal((15, 2))
    assert quad_mmd_statistic(PairedDataset(x, x.copy()), GAUSS) == 0.0


def test_permutation_observed_equals_quad_statistic(rng):
    data = PairedDataset(rng.standard_normal((30, 3)), rng.standard_normal((30, 3)) + 0.5)
    out = permutation_mmd_test(data, GAUSS, PermutationPlan(50, 3))
    assert out.statistic == pytest.approx(quad_mmd_statistic(data, GAUSS), rel=1e-12, abs=1e-15)


def test_permutation_minimum_p_value(rng):
    data = PairedDataset(rng.standard_normal((20, 2)), rng.standard_normal((20, 2)) + 10.0)
    out = permutation_mmd_test(data, GAUSS, PermutationPlan(200, 1))
    assert out.p_value == 1 / 201
    assert out.reject and out.statistic > out.threshold


def test_permutation_is_seed_deterministic(rng):
    data = PairedDataset(rng.standard_normal((25, 2)), rng.standard_normal((25, 2)) + 0.3)
    a = permutation_mmd_test(data, MEDIAN, PermutationPlan(100, 42))
    b = permutation_mmd_test(data, MEDIAN, PermutationPlan(100, 42))
    assert (a.p_value, a.threshold, a.statistic) == (b.p_value, b.threshold, b.statistic)


def test_permutation_reject_matches_threshold(rng):
    for s in range(20):
        r = np.random.default_rng(s)
        data = PairedDataset(r.standard_normal((20, 2)), r.standard_normal((20, 2)) + 0.4)
        out = permutation_mmd_test(data, GAUSS, PermutationPlan(99, s))
        assert out.reject == (out.statistic > out.threshold)


def test_permutation_plan_needs_one_permutation():
    with pytest.raises(ValueError):
        PermutationPlan(0)


@pytest.mark.slow
def test_permutation_level():
    rate = _rate(lambda d: permutation_mmd_test(d, MEDIAN, PermutationPlan(200, 5)), 100, 500, 11)
    assert 0.03 <= rate <= 0.07


def test_block_partition():
    data = PairedDataset(np.arange(9.0)[:, None], np.zeros((9, 1)))
    vals = block_statistics(data, LINEAR, 3)
    expected = [quad_mmd_statistic(data.subset(slice(s, s + 3)), LINEAR) * 9 / 6 for s in (0, 3, 6)]
    np.testing.assert_allclose(vals, expected, rtol=1e-15)


def test_block_drops_remainder(rng):
    data = PairedDataset(rng.standard_normal((11, 2)), rng.standard_normal((11, 2)))
    assert block_statistics(data, GAUSS, 3).size == 3
    np.testing.assert_array_equal(block_statistics(data, GAUSS, 3), block_statistics(data.subset(slice(0, 9)), GAUSS, 3))


def test_single_block_is_rescaled_quad_statistic(rng):
    data = PairedDataset(rng.standard_normal((17, 3)), rng.standard_normal((17, 3)) + 0.3)
    n = data.n
    (blk,) = block_statistics(data, GAUSS, n)
    assert blk * n * (n - 1) / n**2 == pytest.approx(quad_mmd_statistic(data, GAUSS), rel=1e-12)


def test_block_needs_two_blocks(rng):
    data = PairedDataset(rng.standard_normal((10, 2)), rng.standard_normal((10, 2)))
    with pytest.raises(ValueError):
        block_mmd_test(data, GAUSS, 6)
    with pytest.raises(ValueError):
        block_mmd_test(data, GAUSS, 1)
    assert block_mmd_test(data, GAUSS).diagnostics["block_size"] == 3


@pytest.mark.slow
def test_block_level():
    assert 0.03 <= _rate(lambda d: block_mmd_test(d, MEDIAN, 20), 400, 1000, 12) <= 0.07


def test_linear_hand_instance():
    np.testing.assert_array_equal(linear_h(ONE_D, LINEAR), [2.0, 12.0])
    # mean 7, sample sd sqrt(50), two terms
    assert linear_mmd_test(ONE_D, LINEAR).statistic == pytest.approx(7 / (math.sqrt(50) / math.sqrt(2)), rel=1e-15)


def test_linear_needs_four_pairs():
    with pytest.raises(ValueError):
        linear_mmd_test(ONE_D.subset(slice(0, 3)), LINEAR)


@pytest.mark.slow
def test_linear_level():
    assert 0.03 <= _rate(lambda d: linear_mmd_test(d, MEDIAN), 500, 1000, 13) <= 0.07


def test_cross_hand_instance():
    np.testing.assert_array_equal(cross_u(ONE_D, LINEAR), [3.5, 7.0])
    # mean 5.25, sample sd 1.75 * sqrt(2), two terms
    assert cross_mmd_test(ONE_D, LINEAR).statistic == pytest.approx(3.0, rel=1e-15)


def test_cross_odd_n_puts_extra_pair_in_first_half(rng):
    data = PairedDataset(rng.standard_normal((7, 2)), rng.standard_normal((7, 2)))
    assert cross_u(data, GAUSS).size == 4


@pytest.mark.parametrize("test", [lambda d: block_mmd_test(d, GAUSS, 3), lambda d: linear_mmd_test(d, GAUSS),
                                  lambda d: cross_mmd_test(d, GAUSS)], ids=["block", "linear", "cross"])
def test_zero_h_is_degenerate(rng, test):
    x = rng.standard_normal((12, 2))
    out = test(PairedDataset(x, x.copy()))
    assert out.degenerate and not out.reject and out.p_value == 1.0


@pytest.mark.parametrize("test", [lambda d: block_mmd_test(d, GAUSS, 4), lambda d: linear_mmd_test(d, GAUSS),
                                  lambda d: cross_mmd_test(d, GAUSS),
                                  lambda d: permutation_mmd_test(d, GAUSS, PermutationPlan(30, 2))],
                         ids=["block", "linear", "cross", "perm"])
def test_global_swap_leaves_statistic_unchanged(rng, test):
    # H(Z_i, Z_j) is invariant when X and Y are exchanged in both pairs
    data = PairedDataset(rng.standard_normal((24, 3)), rng.standard_normal((24, 3)) + 0.4)
    assert test(data.swapped()).statistic == pytest.approx(test(data).statistic, rel=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmmd.kernels import (Family, Fixed, KernelSpec, MedianHeuristic, MinimaxGaussian, ResolvedKernel,
                          eval_H, eval_kernel, median_heuristic, median_metric, resolve_bandwidth)

GAUSS = ResolvedKernel(Family.GAUSSIAN, 1.0)
LAPLACE = ResolvedKernel(Family.LAPLACE, 1.3)
LINEAR = ResolvedKernel(Family.LINEAR)

finite = st.floats(-5, 5, allow_nan=False)


def test_eval_kernel_examples():
    assert eval_kernel(GAUSS, [0.3, -1.0], [0.3, -1.0]) == 1.0
    assert eval_kernel(LINEAR, [1, 2], [3, 4]) == 11.0
    assert eval_kernel(GAUSS, [0.0], [2.0]) == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert eval_kernel(GAUSS, [0.0], [2.0]) == pytest.approx(0.135335, abs=5e-7)


def test_laplace_uses_l1_norm():
    assert eval_kernel(LAPLACE, [0, 0], [1, -2]) == pytest.approx(math.exp(-3 / 1.3))


def test_eval_kernel_errors():
    with pytest.raises(ValueError, match="dimension"):
        eval_kernel(GAUSS, [1, 2], [1])
    with pytest.raises(ValueError, match="non-finite"):
        eval_kernel(GAUSS, [np.nan], [1.0])


def test_rate_and_length_scale_agree():
    k = ResolvedKernel.gaussian_rate(0.7)
    x, y = np.array([0.1, 0.4]), np.array([-1.0, 2.0])
    assert eval_kernel(k, x, y) == pytest.approx(math.exp(-0.7 * np.sum((x - y) ** 2)), rel=1e-14)
    assert k.nu == pytest.approx(0.7)


def test_bandwidth_must_be_positive():
    with pytest.raises(ValueError):
        ResolvedKernel(Family.GAUSSIAN, 0.0)
    with pytest.raises(ValueError):
        Fixed(-1.0)


def test_median_heuristic_examples():
    assert median_heuristic(np.array([[0.0], [1.0], [3.0]])) == 2.0
    assert median_heuristic(np.array([[0.0], [4.0]])) == 4.0
    # six distances, sorted 1,1,1,2,2,3 -> lower middle is 1
    assert median_heuristic(np.array([[0.0], [1.0], [2.0], [3.0]])) == 1.0


def test_median_heuristic_even_count_uses_lower_middle():
    pts = np.array([[0.0], [1.0], [3.0], [7.0]])  # distances 1,3,7,2,6,4 -> sorted 1,2,3,4,6,7
    assert median_heuristic(pts) == 3.0


def test_median_heuristic_degenerate():
    with pytest.raises(ValueError, match="zero"):
        median_heuristic(np.array([[1.0], [1.0], [1.0]]))
    # two identical rows plus one distinct: distances {0, 2, 2} -> median 2
    assert median_heuristic(np.array([[1.0], [1.0], [3.0]])) == 2.0
    # three identical plus one distinct: {0,0,0,d,d,d} -> lower middle is 0 -> error
    with pytest.raises(ValueError):
        median_heuristic(np.array([[1.0], [1.0], [1.0], [5.0]]))
    with pytest.raises(ValueError):
        median_heuristic(np.array([[1.0]]))


def test_median_heuristic_permutation_invariant(rng):
    pts = rng.standard_normal((31, 3))
    assert median_heuristic(pts) == median_heuristic(pts[rng.permutation(31)])


def test_median_heuristic_cityblock():
    # points (0,0), (1,1), (3,0): L1 distances {2, 3, 3}, Euclidean {sqrt 2, 3, sqrt 5}
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 0.0]])
    assert median_heuristic(pts, "cityblock") == 3.0
    assert median_heuristic(pts) == pytest.approx(math.sqrt(5), rel=1e-15)
    with pytest.raises(ValueError):
        median_heuristic(pts, "cosine")


def test_laplace_median_uses_l1_distance():
    x, y = np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([[3.0, 0.0]])
    assert resolve_bandwidth(KernelSpec(Family.LAPLACE, MedianHeuristic()), x, y).lam == 3.0
    assert median_metric(Family.GAUSSIAN) == "euclidean" and median_metric(Family.LAPLACE) == "cityblock"


def test_resolve_bandwidth():
    x, y = np.array([[0.0], [1.0]]), np.array([[3.0]])
    assert resolve_bandwidth(KernelSpec(Family.GAUSSIAN, Fixed(2.5)), x, y).lam == 2.5
    assert resolve_bandwidth(KernelSpec(Family.GAUSSIAN, MedianHeuristic()), x, y).lam == 2.0
    assert resolve_bandwidth(KernelSpec(Family.LAPLACE, MedianHeuristic(2.0)), x, y).lam == 4.0
    k = resolve_bandwidth(KernelSpec(Family.GAUSSIAN, MinimaxGaussian(2, 256, 4)), x, y)
    assert k.nu == pytest.approx(256 ** (1 / 3), rel=1e-12)
    assert k.nu == pytest.approx(6.3496, abs=5e-5)


def test_minimax_requires_gaussian():
    with pytest.raises(ValueError, match="Gaussian"):
        KernelSpec(Family.LAPLACE, MinimaxGaussian(2, 100, 3))


def test_resolve_bandwidth_dimension_mismatch():
    with pytest.raises(ValueError):
        resolve_bandwidth(KernelSpec(), np.zeros((3, 2)), np.ones((3, 1)))


def test_eval_H_examples():
    z = ([1.0, 2.0], [1.0, 2.0])
    w = ([0.5, -1.0], [0.5, -1.0])
    assert eval_H(GAUSS, z, w) == 0.0
    assert eval_H(LINEAR, ([1.0], [0.0]), ([2.0], [0.0])) == 2.0


pairs = st.integers(1, 4).flatmap(lambda d: st.tuples(*[arrays(float, d, elements=finite) for _ in range(4)]))


@settings(max_examples=60, deadline=None)
@given(pairs, st.sampled_from([GAUSS, LAPLACE, LINEAR]))
def test_H_symmetries(vecs, k):
    x1, y1, x2, y2 = vecs
    h = eval_H(k, (x1, y1), (x2, y2))
    assert eval_H(k, (x2, y2), (x1, y1)) == pytest.approx(h, abs=1e-15 * max(1, abs(h)))
    assert eval_H(k, (y1, x1), (x2, y2)) == pytest.approx(-h, abs=1e-12 * max(1, abs(h)))
    assert eval_H(k, (y1, x1), (y2, x2)) == pytest.approx(h, abs=1e-12 * max(1, abs(h)))
    if k is not LINEAR:
        assert abs(h) <= 4.0
        assert 0 < eval_kernel(k, x1, y1) <= 1

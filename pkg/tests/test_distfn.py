import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from mmmd.distfn import (chi2_cdf, chi2_quantile, chi2_sf, empirical_moments, ks_distance, std_normal_cdf,
                         std_normal_quantile)

mpmath.mp.dps = 50


def mp_phi(x):
    return float(mpmath.ncdf(x))


def test_normal_cdf_reference_values():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
    for x in np.linspace(-8, 8, 161):
        assert abs(std_normal_cdf(float(x)) - mp_phi(float(x))) <= 1e-10


@given(st.floats(-30, 30))
def test_normal_cdf_symmetry(x):
    assert std_normal_cdf(-x) == pytest.approx(1 - std_normal_cdf(x), abs=1e-15)


def test_normal_quantile_reference_values():
    assert std_normal_quantile(0.5) == 0.0
    assert std_normal_quantile(0.95) == pytest.approx(1.644854, abs=1e-6)
    for p in [1e-12, 1e-6, 0.01, 0.02425, 0.1, 0.3, 0.7, 0.975, 0.99, 1 - 1e-9]:
        ref = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(p) - 1))
        assert std_normal_quantile(p) == pytest.approx(ref, rel=1e-12, abs=1e-12)


@given(st.floats(1e-10, 1 - 1e-10))
def test_normal_quantile_round_trip(p):
    assert abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_normal_quantile_domain(p):
    with pytest.raises(ValueError):
        std_normal_quantile(p)


def test_chi2_quantile_examples():
    assert chi2_quantile(1, 0.95) == pytest.approx(3.841459, abs=1e-5)
    assert chi2_quantile(2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-12)
    assert chi2_quantile(3, 0.95) == pytest.approx(7.814728, abs=1e-6)


@pytest.mark.parametrize("r", [1, 2, 3, 5, 10, 40, 200])
def test_chi2_quantile_against_scipy(r):
    for p in [1e-6, 0.01, 0.05, 0.3, 0.5, 0.9, 0.95, 0.999, 1 - 1e-9]:
        assert chi2_quantile(r, p) == pytest.approx(stats.chi2.ppf(p, r), rel=1e-8)


def test_chi2_quantile_monotone():
    qs = [chi2_quantile(4, p) for p in np.linspace(0.001, 0.999, 200)]
    assert all(a < b for a, b in zip(qs, qs[1:]))


@given(st.floats(1e-6, 1 - 1e-6))
def test_chi2_one_df_is_squared_normal(p):
    assert chi2_quantile(1, p) == pytest.approx(std_normal_quantile((1 + p) / 2) ** 2, rel=1e-7, abs=1e-12)


def test_chi2_cdf_and_sf():
    for r in [1, 2, 7, 30]:
        for x in [0.01, 0.5, 3.0, 10.0, 60.0]:
            assert chi2_cdf(r, x) == pytest.approx(stats.chi2.cdf(x, r), abs=1e-12)
            assert chi2_sf(r, x) == pytest.approx(stats.chi2.sf(x, r), rel=1e-10)
    assert chi2_cdf(3, 0.0) == 0.0 and chi2_sf(3, -1.0) == 1.0


def test_ks_distance_examples():
    m = 50
    sample = [std_normal_quantile((i - 0.5) / m) for i in range(1, m + 1)]
    assert ks_distance(sample) == pytest.approx(0.5 / m, abs=1e-12)
    assert ks_distance([0.0]) == 0.5
    assert ks_distance([0.0, 0.0, 0.0]) == 0.5


def test_ks_distance_matches_scipy(rng):
    x = rng.standard_normal(300) * 1.1
    assert ks_distance(x) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=40))
def test_ks_distance_in_unit_interval(xs):
    assert 0 <= ks_distance(xs) <= 1


def test_ks_distance_rejects_empty():
    with pytest.raises(ValueError):
        ks_distance([])


def test_empirical_moments(rng):
    x = rng.standard_normal(20000)
    m = empirical_moments(x)
    assert m["var"] == pytest.approx(np.var(x, ddof=1))
    assert abs(m["excess_kurtosis"]) < 0.15

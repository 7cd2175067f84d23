"""Normal and chi-squared distribution functions, KS distance and sample moments.

Everything here is scalar, pure Python on top of ``math``; accuracy targets are
1e-10 absolute for the normal CDF/quantile and 1e-8 relative for the
chi-squared quantile.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

_SQRT2 = math.sqrt(2.0)

# Acklam's rational approximation to the normal quantile (rel. error ~1.15e-9),
# polished below with one Halley step.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_sf(x: float) -> float:
    """Upper tail 1 - Phi(x), accurate for large positive x."""
    return 0.5 * math.erfc(x / _SQRT2)


def std_normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # Halley refinement; work in the smaller tail to keep the residual accurate
    e = std_normal_cdf(x) - p if p < 0.5 else (1.0 - p) - std_normal_sf(x)
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_cdf(r: int, x: float) -> float:
    if r < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0:
        return 0.0
    a, h = 0.5 * r, 0.5 * x
    if h < a + 1.0:
        return _lower_gamma_series(a, h)
    return 1.0 - _upper_gamma_cf(a, h)


def chi2_sf(r: int, x: float) -> float:
    """Upper tail of chi^2_r, computed directly in the tail."""
    if r < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0:
        return 1.0
    a, h = 0.5 * r, 0.5 * x
    if h < a + 1.0:
        return 1.0 - _lower_gamma_series(a, h)
    return _upper_gamma_cf(a, h)


def _chi2_logpdf(r: int, x: float) -> float:
    a = 0.5 * r
    return (a - 1.0) * math.log(x) - 0.5 * x - a * math.log(2.0) - math.lgamma(a)


def chi2_quantile(r: int, p: float) -> float:
    """Inverse chi-squared CDF by safeguarded Newton from a Wilson-Hilferty start."""
    if r < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    z = std_normal_quantile(p)
    c = 2.0 / (9.0 * r)
    x = r * max(1.0 - c + z * math.sqrt(c), 1e-3) ** 3
    lo, hi = 0.0, math.inf
    upper = p > 0.5
    for _ in range(200):
        # residual measured in the tail that is small, for relative accuracy
        f = (1.0 - p) - chi2_sf(r, x) if upper else chi2_cdf(r, x) - p
        if f > 0:
            hi = x
        else:
            lo = x
        pdf = math.exp(_chi2_logpdf(r, x))
        x_new = x - f / pdf if pdf > 0 else math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * x
        if abs(x_new - x) <= 1e-15 * x:
            x = x_new
            break
        x = x_new
    return x


def ks_distance(sample: Sequence[float], cdf: Callable[[float], float] = std_normal_cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF of ``sample`` and ``cdf``."""
    values = np.sort(np.asarray(sample, dtype=float))
    m = values.size
    if m == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite sample values")
    f = np.array([cdf(float(v)) for v in values])
    i = np.arange(1, m + 1)
    return float(max(np.max(np.abs(i / m - f)), np.max(np.abs((i - 1) / m - f))))


def empirical_moments(sample: Sequence[float]) -> dict:
    """Mean, variance (ddof=1), skewness and excess kurtosis of a sample."""
    v = np.asarray(sample, dtype=float)
    mean = float(v.mean())
    c = v - mean
    m2 = float(np.mean(c**2))
    out = {"n": int(v.size), "mean": mean, "var": float(c @ c / (v.size - 1)) if v.size > 1 else 0.0}
    out["skew"] = float(np.mean(c**3) / m2**1.5) if m2 > 0 else 0.0
    out["excess_kurtosis"] = float(np.mean(c**4) / m2**2 - 3.0) if m2 > 0 else 0.0
    return out

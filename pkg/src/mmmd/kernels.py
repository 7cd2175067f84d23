"""Kernel families, bandwidth rules and the pairwise two-sample kernel H.

Gaussian kernels are parameterized by a length scale ``lam`` so that
``k(x, y) = exp(-||x - y||^2 / (2 lam^2))``. The minimax rule is naturally
expressed as a rate ``nu`` with ``k(x, y) = exp(-nu ||x - y||^2)``; the two are
related by ``lam = 1 / sqrt(2 nu)`` and :class:`ResolvedKernel` always stores
``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
from scipy.spatial.distance import cdist, pdist


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    LINEAR = "linear"


@dataclass(frozen=True)
class Fixed:
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"fixed bandwidth must be positive and finite, got {self.lam}")


@dataclass(frozen=True)
class MedianHeuristic:
    """Median pairwise distance of the pooled sample, times ``multiplier``."""

    multiplier: float = 1.0

    def __post_init__(self):
        if not self.multiplier > 0:
            raise ValueError("multiplier must be positive")


@dataclass(frozen=True)
class MinimaxGaussian:
    """Rate-optimal Gaussian scale ``nu = n ** (4 / (d + 4 beta))``."""

    beta: float
    n: int
    d: int

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive integers")

    @property
    def nu(self) -> float:
        return float(self.n) ** (4.0 / (self.d + 4.0 * self.beta))


BandwidthRule = Union[Fixed, MedianHeuristic, MinimaxGaussian]


@dataclass(frozen=True)
class KernelSpec:
    family: Family = Family.GAUSSIAN
    bandwidth: BandwidthRule = field(default_factory=MedianHeuristic)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if isinstance(self.bandwidth, MinimaxGaussian) and self.family is not Family.GAUSSIAN:
            raise ValueError("the minimax bandwidth rule is only defined for the Gaussian kernel")


@dataclass(frozen=True)
class ResolvedKernel:
    """A kernel with a concrete bandwidth, ready for evaluation."""

    family: Family
    lam: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is not Family.LINEAR and not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"{self.family.value} kernel needs a positive bandwidth, got {self.lam}")

    @classmethod
    def gaussian_rate(cls, nu: float) -> "ResolvedKernel":
        """Gaussian kernel exp(-nu ||x-y||^2)."""
        if not nu > 0:
            raise ValueError("nu must be positive")
        return cls(Family.GAUSSIAN, 1.0 / math.sqrt(2.0 * nu))

    @property
    def nu(self) -> float:
        return 1.0 / (2.0 * self.lam**2)

    @property
    def metric(self) -> str:
        """Distance that the kernel is a function of (``"dot"`` for linear)."""
        return {
            Family.GAUSSIAN: "sqeuclidean",
            Family.LAPLACE: "cityblock",
            Family.LINEAR: "dot",
        }[self.family]

    def from_distance(self, dist: np.ndarray) -> np.ndarray:
        """Map a block of distances (as given by :attr:`metric`) to kernel values."""
        if self.family is Family.LINEAR:
            return dist
        scale = -0.5 / self.lam**2 if self.family is Family.GAUSSIAN else -1.0 / self.lam
        out = np.multiply(dist, scale)
        return np.exp(out, out=out)

    def gram(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.from_distance(pairwise(a, b, self.metric))


def pairwise(a: np.ndarray, b: np.ndarray, metric: str) -> np.ndarray:
    if metric == "dot":
        return a @ b.T
    return cdist(a, b, metric)


def rowwise(a: np.ndarray, b: np.ndarray, metric: str) -> np.ndarray:
    """Distances between matching rows of ``a`` and ``b``."""
    if metric == "dot":
        return np.einsum("ij,ij->i", a, b)
    diff = a - b
    if metric == "sqeuclidean":
        return np.einsum("ij,ij->i", diff, diff)
    return np.abs(diff).sum(axis=1)


def as_matrix(a) -> np.ndarray:
    """Coerce to a float (n, d) array; a 1-D input is treated as n scalar observations."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"expected an (n, d) sample matrix, got shape {a.shape}")
    return a


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError("expected a vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite coordinates")
    return v


def eval_kernel(k: ResolvedKernel, x, y) -> float:
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    if k.family is Family.GAUSSIAN:
        return math.exp(-float(diff @ diff) / (2.0 * k.lam**2))
    if k.family is Family.LAPLACE:
        return math.exp(-float(np.abs(diff).sum()) / k.lam)
    return float(x @ y)


def eval_H(k: ResolvedKernel, z1, z2) -> float:
    """H(z1, z2) = k(x1, x2) - k(x1, y2) - k(x2, y1) + k(y1, y2)."""
    (x1, y1), (x2, y2) = z1, z2
    return (
        eval_kernel(k, x1, x2)
        - eval_kernel(k, x1, y2)
        - eval_kernel(k, x2, y1)
        + eval_kernel(k, y1, y2)
    )


def median_heuristic(pooled: np.ndarray, metric: str = "euclidean") -> float:
    """Median distance over all distinct pairs of rows.

    For an even number of pairs the lower of the two middle order statistics is
    returned, so the result is always an observed distance.

    Args:
        pooled: rows of the combined sample.
        metric: ``"euclidean"`` or ``"cityblock"`` (L1).

    Raises:
        ValueError: fewer than two rows, an unknown metric, or a zero median.
    """
    pooled = as_matrix(pooled)
    if pooled.shape[0] < 2:
        raise ValueError("median heuristic needs at least two rows")
    if metric == "euclidean":
        # squaring is monotone, so take the order statistic first and one square root after
        sq = pdist(pooled, "sqeuclidean")
        k = (sq.size - 1) // 2
        med = math.sqrt(float(np.partition(sq, k)[k]))
    elif metric == "cityblock":
        dist = pdist(pooled, "cityblock")
        k = (dist.size - 1) // 2
        med = float(np.partition(dist, k)[k])
    else:
        raise ValueError(f"unknown metric {metric!r}")
    if not med > 0:
        raise ValueError("median pairwise distance is zero; bandwidth must be positive")
    return med


def median_metric(family: Family) -> str:
    """Distance the median heuristic uses for ``family``: the one inside the kernel."""
    return "cityblock" if Family(family) is Family.LAPLACE else "euclidean"


def resolve_bandwidth(spec: KernelSpec | ResolvedKernel, x: np.ndarray, y: np.ndarray) -> ResolvedKernel:
    if isinstance(spec, ResolvedKernel):
        return spec
    x, y = as_matrix(x), as_matrix(y)
    if x.size == 0 or y.size == 0:
        raise ValueError("empty sample")
    if x.shape[1] != y.shape[1]:
        raise ValueError("X and Y have different dimensions")
    rule = spec.bandwidth
    if spec.family is Family.LINEAR:
        return ResolvedKernel(Family.LINEAR)
    if isinstance(rule, Fixed):
        return ResolvedKernel(spec.family, rule.lam)
    if isinstance(rule, MinimaxGaussian):
        return ResolvedKernel.gaussian_rate(rule.nu)
    pooled = np.concatenate([x, y])
    return ResolvedKernel(spec.family, rule.multiplier * median_heuristic(pooled, median_metric(spec.family)))

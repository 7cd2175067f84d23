"""Seeded synthetic two-sample generators.

Every dataset is drawn from a Philox counter-based stream keyed by a 64-bit
seed, so the same (spec, seed) gives bit-identical arrays on every platform
for a given numpy release. Child seeds for replications come from
:func:`split_seed`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .statcore import PairedDataset

_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def split_seed(seed: int, index: int) -> int:
    """Deterministic 64-bit child seed for stream ``index`` of ``seed``."""
    z = (_mix64(seed & _MASK64) + 0x9E3779B97F4A7C15 * ((index & _MASK64) + 1)) & _MASK64
    return _mix64(z)


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


@dataclass(frozen=True)
class GaussianMeanShift:
    """P = N_d(0, I), Q = N_d(mu, I) with mu = (eps,)*j + (0,)*(d-j)."""

    d: int
    j: int
    eps: float

    def validate(self):
        if not 1 <= self.j <= self.d:
            raise ValueError("need 1 <= j <= d")

    @property
    def is_null(self) -> bool:
        return self.eps == 0

    def mean(self) -> np.ndarray:
        mu = np.zeros(self.d)
        mu[: self.j] = self.eps
        return mu

    def sample(self, rng, n):
        x = rng.standard_normal((n, self.d))
        y = rng.standard_normal((n, self.d)) + self.mean()
        return x, y


@dataclass(frozen=True)
class MultivariateT:
    """P = Q = t_d(df), drawn as Z / sqrt(S / df) without variance standardization."""

    d: int
    df: float = 10.0

    def validate(self):
        if not self.df > 2:
            raise ValueError("df must exceed 2")

    is_null = True

    def _draw(self, rng, n):
        z = rng.standard_normal((n, self.d))
        s = rng.chisquare(self.df, size=n)
        return z / np.sqrt(s / self.df)[:, None]

    def sample(self, rng, n):
        return self._draw(rng, n), self._draw(rng, n)


@dataclass(frozen=True)
class ArCovScale:
    """P = N_d(0, S), Q = N_d(0, scale * S) with S_ij = rho^|i-j|."""

    d: int
    rho: float = 0.5
    scale: float = 1.3

    def validate(self):
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def is_null(self) -> bool:
        return self.scale == 1

    def covariance(self) -> np.ndarray:
        idx = np.arange(self.d)
        return self.rho ** np.abs(idx[:, None] - idx[None, :])

    def _ar1(self, rng, n):
        e = rng.standard_normal((n, self.d))
        out = np.empty_like(e)
        out[:, 0] = e[:, 0]
        c = math.sqrt(1.0 - self.rho**2)
        for t in range(1, self.d):
            out[:, t] = self.rho * out[:, t - 1] + c * e[:, t]
        return out

    def sample(self, rng, n):
        return self._ar1(rng, n), math.sqrt(self.scale) * self._ar1(rng, n)


@dataclass(frozen=True)
class StdGaussian:
    d: int

    def validate(self):
        pass

    is_null = True

    def sample(self, rng, n):
        return rng.standard_normal((n, self.d)), rng.standard_normal((n, self.d))


VARIANTS = {
    "mean_shift": GaussianMeanShift,
    "multivariate_t": MultivariateT,
    "ar_cov_scale": ArCovScale,
    "std_gaussian": StdGaussian,
}


@dataclass(frozen=True)
class GeneratorSpec:
    variant: GaussianMeanShift | MultivariateT | ArCovScale | StdGaussian
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.variant.d < 1:
            raise ValueError("d must be >= 1")
        self.variant.validate()

    def with_(self, **changes) -> "GeneratorSpec":
        fields = {"variant": self.variant, "n": self.n, "seed": self.seed, **changes}
        return GeneratorSpec(**fields)

    def to_dict(self) -> dict:
        name = next(k for k, v in VARIANTS.items() if isinstance(self.variant, v))
        return {"variant": name, **asdict(self.variant), "n": self.n, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        d = dict(d)
        variant = VARIANTS[d.pop("variant")]
        n, seed = d.pop("n", 2), d.pop("seed", 0)
        return cls(variant(**d), n, seed)


def generate(spec: GeneratorSpec) -> PairedDataset:
    x, y = spec.variant.sample(rng_from_seed(spec.seed), spec.n)
    return PairedDataset(x, y)

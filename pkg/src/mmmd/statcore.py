"""Martingale MMD statistic, its self-normalized test and the gamma family.

All statistics are built from the row sums

    R_i = sum_{j < i} H(Z_i, Z_j),    i = 2, ..., n,

with ``Z_i = (X_i, Y_i)``. The mMMD statistic is ``T_n = (1/n) sum_i R_i / i``
with variance estimate ``sigma_n^2 = (1/n^2) sum_i (R_i / i)^2``, and the
generalized family replaces the weight ``1/i`` by ``i ** -gamma``.

Row sums are computed in row blocks so that only ``block_rows * n`` kernel
values are held in memory at any time.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .distfn import std_normal_quantile, std_normal_sf
from .kernels import KernelSpec, ResolvedKernel, as_matrix, pairwise, resolve_bandwidth

# Upper bound on kernel entries per block (4 kernel blocks of this size are live).
_BLOCK_ENTRIES = 1 << 20
# Short blocks waste less work above the diagonal.
_MAX_BLOCK_ROWS = 256


@dataclass(frozen=True)
class PairedDataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x, y = as_matrix(self.x), as_matrix(self.y)
        if x.shape != y.shape:
            raise ValueError(f"paired samples need equal shapes, got {x.shape} and {y.shape}")
        if x.shape[0] < 2:
            raise ValueError("need at least two pairs")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def swapped(self) -> "PairedDataset":
        return PairedDataset(self.y, self.x)

    def shuffled(self, seed: int) -> "PairedDataset":
        """Same pairs in a seed-determined order."""
        perm = np.random.Generator(np.random.Philox(seed)).permutation(self.n)
        return PairedDataset(self.x[perm], self.y[perm])

    def subset(self, idx) -> "PairedDataset":
        return PairedDataset(self.x[idx], self.y[idx])


@dataclass
class TestOutcome:
    method: str
    statistic: float
    threshold: float
    p_value: float | None
    reject: bool
    alpha: float
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class


@dataclass(frozen=True)
class MmdBreakdown:
    row_sums: np.ndarray
    t_n: float
    sigma_n: float
    eta_n: float  # nan when degenerate

    @property
    def n(self) -> int:
        return self.row_sums.size + 1

    @property
    def degenerate(self) -> bool:
        return not self.sigma_n > 0


@dataclass(frozen=True)
class GammaStatistic:
    gamma: float
    numerator: float
    denominator: float
    standardized: float  # nan when the denominator vanishes
    t_n_gamma: float

    @property
    def degenerate(self) -> bool:
        return not self.denominator > 0


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")


def h_blocks(
    data: PairedDataset,
    kernels: Sequence[ResolvedKernel],
    block_rows: int | None = None,
) -> Iterator[tuple[int, int, list[np.ndarray]]]:
    """Yield ``(lo, hi, blocks)`` with ``blocks[l][a, j] = H_l(Z_{lo+a}, Z_j)`` for ``j < hi``.

    Distances are computed once per metric and shared between kernels of the
    same family.
    """
    n = data.n
    if block_rows is None:
        block_rows = max(1, min(n, _MAX_BLOCK_ROWS, _BLOCK_ENTRIES // n))
    x, y = data.x, data.y
    metrics = sorted({k.metric for k in kernels} - {"dot"})
    for lo in range(0, n, block_rows):
        hi = min(n, lo + block_rows)
        xi, yi, xj, yj = x[lo:hi], y[lo:hi], x[:hi], y[:hi]
        dist = {
            m: (pairwise(xi, xj, m), pairwise(xi, yj, m), pairwise(yi, xj, m), pairwise(yi, yj, m))
            for m in metrics
        }
        blocks = []
        for k in kernels:
            if k.metric == "dot":
                # bilinear: H = <x_i - y_i, x_j - y_j>, exact zero for identical pairs
                blocks.append((xi - yi) @ (xj - yj).T)
                continue
            dxx, dxy, dyx, dyy = dist[k.metric]
            h = k.from_distance(dxx)
            h -= k.from_distance(dxy)
            h -= k.from_distance(dyx)
            h += k.from_distance(dyy)
            blocks.append(h)
        yield lo, hi, blocks


def row_sums(data: PairedDataset, kernels: Sequence[ResolvedKernel], block_rows: int | None = None) -> np.ndarray:
    """Array of shape (r, n - 1) holding R_i for i = 2..n under each kernel."""
    n = data.n
    out = np.zeros((len(kernels), n))
    for lo, hi, blocks in h_blocks(data, kernels, block_rows):
        # columns below lo are all earlier pairs; the square [lo, hi) needs its strict lower triangle
        tri = np.tri(hi - lo, k=-1, dtype=bool)
        for l, h in enumerate(blocks):
            out[l, lo:hi] = h[:, :lo].sum(axis=1) + np.where(tri, h[:, lo:], 0.0).sum(axis=1)
    return out[:, 1:]


def _fsum(v) -> float:
    return math.fsum(np.asarray(v, dtype=float).tolist())


def breakdown_from_row_sums(rs: np.ndarray) -> MmdBreakdown:
    n = rs.size + 1
    means = rs / np.arange(2, n + 1)
    t_n = _fsum(means) / n
    sigma_n = math.sqrt(_fsum(means * means)) / n
    eta = t_n / sigma_n if sigma_n > 0 else math.nan
    return MmdBreakdown(row_sums=rs, t_n=t_n, sigma_n=sigma_n, eta_n=eta)


def gamma_from_row_sums(rs: np.ndarray, gamma: float) -> GammaStatistic:
    _check_gamma(gamma)
    n = rs.size + 1
    weighted = rs * np.arange(2, n + 1, dtype=float) ** (-gamma)
    num = _fsum(weighted)
    den = math.sqrt(_fsum(weighted * weighted))
    std = num / den if den > 0 else math.nan
    return GammaStatistic(gamma=gamma, numerator=num, denominator=den, standardized=std,
                          t_n_gamma=num / float(n) ** (2.0 - gamma))


def compute_mmd_breakdown(data: PairedDataset, k: ResolvedKernel) -> MmdBreakdown:
    return breakdown_from_row_sums(row_sums(data, [k])[0])


def compute_gamma_statistic(data: PairedDataset, k: ResolvedKernel, gamma: float) -> GammaStatistic:
    _check_gamma(gamma)
    return gamma_from_row_sums(row_sums(data, [k])[0], gamma)


def normal_outcome(method: str, statistic: float, alpha: float, degenerate: bool, diagnostics: dict) -> TestOutcome:
    """One-sided standard-normal calibration shared by every Gaussian-calibrated test."""
    threshold = std_normal_quantile(1.0 - alpha)
    if degenerate or not math.isfinite(statistic):
        return TestOutcome(method, 0.0, threshold, 1.0, False, alpha, True, diagnostics)
    return TestOutcome(method, statistic, threshold, std_normal_sf(statistic), statistic > threshold,
                       alpha, False, diagnostics)


def _prepare(data: PairedDataset, k: KernelSpec | ResolvedKernel, shuffle_seed: int | None):
    if shuffle_seed is not None:
        data = data.shuffled(shuffle_seed)
    return data, resolve_bandwidth(k, data.x, data.y)


def mmd_test(
    data: PairedDataset,
    k: KernelSpec | ResolvedKernel,
    alpha: float = 0.05,
    shuffle_seed: int | None = None,
) -> TestOutcome:
    """mMMD test: reject when eta_n exceeds the (1 - alpha) normal quantile.

    The statistic depends on the order of the pairs; pass ``shuffle_seed`` to
    apply a reproducible random reordering first.
    """
    _check_alpha(alpha)
    start = time.perf_counter_ns()
    data, rk = _prepare(data, k, shuffle_seed)
    b = compute_mmd_breakdown(data, rk)
    diag = {"bandwidth": rk.lam, "kernel": rk.family.value, "n": data.n, "d": data.d,
            "t_n": b.t_n, "sigma_n": b.sigma_n, "runtime_ns": time.perf_counter_ns() - start}
    return normal_outcome("mmmd", b.eta_n, alpha, b.degenerate, diag)


def gamma_test(
    data: PairedDataset,
    k: KernelSpec | ResolvedKernel,
    gamma: float,
    alpha: float = 0.05,
    shuffle_seed: int | None = None,
) -> TestOutcome:
    _check_alpha(alpha)
    _check_gamma(gamma)
    start = time.perf_counter_ns()
    data, rk = _prepare(data, k, shuffle_seed)
    rs = row_sums(data, [rk])[0]
    g = gamma_from_row_sums(rs, gamma)
    diag = {"bandwidth": rk.lam, "kernel": rk.family.value, "n": data.n, "d": data.d, "gamma": gamma,
            "t_n_gamma": g.t_n_gamma, "runtime_ns": time.perf_counter_ns() - start}
    if gamma == 1.0:
        # report the same statistic (bit for bit) as mmd_test
        b = breakdown_from_row_sums(rs)
        diag.update(t_n=b.t_n, sigma_n=b.sigma_n)
        return normal_outcome("mmmd", b.eta_n, alpha, b.degenerate, diag)
    return normal_outcome("gamma", g.standardized, alpha, g.degenerate, diag)


def estimate_h_moments(aux: PairedDataset, k: ResolvedKernel) -> dict:
    """Plug-in estimates of MMD^2 and Var h(Z) from an auxiliary paired sample.

    ``h(z) = E H(z, Z) - MMD^2``; for each aux point the expectation is replaced
    by the mean over the other aux points.
    """
    m = aux.n
    if m < 2:
        raise ValueError("aux sample needs at least two pairs")
    full_rows = np.zeros(m)
    for lo, hi, (h,) in h_blocks(aux, [k]):
        mask = np.arange(hi)[None, :] < np.arange(lo, hi)[:, None]
        lower = np.where(mask, h, 0.0)
        # H is symmetric: each lower-triangle entry contributes to both its row and column
        full_rows[lo:hi] += lower.sum(axis=1)
        full_rows[:hi] += lower.sum(axis=0)
    row_means = full_rows / (m - 1)
    mmd_sq = _fsum(full_rows) / (m * (m - 1))
    h_hat = row_means - mmd_sq
    return {"mmd_sq_hat": mmd_sq, "var_h_hat": float(np.var(h_hat, ddof=1)) if m > 1 else 0.0}

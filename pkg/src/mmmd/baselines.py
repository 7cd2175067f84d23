"""Reference MMD tests used for comparison.

* quadratic-time MMD calibrated by permutation,
* block MMD (unbiased within-block estimates, studentized across blocks),
* linear-time MMD (disjoint consecutive pairs),
* cross MMD (first half against second half).

Every Gaussian-calibrated test here is one-sided, like the mMMD test. The
block and cross statistics use simple studentizations chosen for benchmarking;
they approximate, rather than reproduce, the published procedures.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, ResolvedKernel, resolve_bandwidth, rowwise
from .statcore import (PairedDataset, TestOutcome, _check_alpha, _fsum, normal_outcome,
                       row_sums)


@dataclass(frozen=True)
class PermutationPlan:
    num_perms: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.num_perms < 1:
            raise ValueError("num_perms must be >= 1")


def quad_mmd_statistic(data: PairedDataset, k: ResolvedKernel) -> float:
    """(1/n^2) sum_{i != j} H(Z_i, Z_j)."""
    return 2.0 * _fsum(row_sums(data, [k])[0]) / data.n**2


def _studentized(values: np.ndarray) -> tuple[float, bool]:
    m = values.size
    sd = float(np.std(values, ddof=1)) if m > 1 else 0.0
    if not sd > 0:
        return math.nan, True
    return float(values.mean()) / (sd / math.sqrt(m)), False


def _diag(rk: ResolvedKernel, data: PairedDataset, start: int, **extra) -> dict:
    return {"bandwidth": rk.lam, "kernel": rk.family.value, "n": data.n, "d": data.d,
            **extra, "runtime_ns": time.perf_counter_ns() - start}


def _pooled_statistic(gram: np.ndarray, perm: np.ndarray, n: int, trace: float) -> float:
    # sum_{i != j} H = v'Gv - tr(G) + 2 sum_i k(x_i, y_i),  v = +1 on X, -1 on Y
    v = np.empty(2 * n)
    v[perm[:n]] = 1.0
    v[perm[n:]] = -1.0
    quad = float(v @ (gram @ v))
    paired = float(gram[perm[:n], perm[n:]].sum())
    return (quad - trace + 2.0 * paired) / n**2


def permutation_mmd_test(
    data: PairedDataset,
    k: KernelSpec | ResolvedKernel,
    plan: PermutationPlan = PermutationPlan(),
    alpha: float = 0.05,
) -> TestOutcome:
    """Quadratic-time MMD with a permutation p-value ``(1 + #{perm >= obs}) / (B + 1)``.

    The 2n pooled points are relabelled uniformly at random and re-paired by
    position; the statistic is re-evaluated from the pooled Gram matrix for
    each relabelling.
    """
    _check_alpha(alpha)
    start = time.perf_counter_ns()
    rk = resolve_bandwidth(k, data.x, data.y)
    n = data.n
    pooled = np.concatenate([data.x, data.y])
    gram = rk.gram(pooled, pooled)
    trace = float(np.trace(gram))
    observed = _pooled_statistic(gram, np.arange(2 * n), n, trace)
    rng = np.random.Generator(np.random.Philox(plan.seed))
    perm_stats = np.array([_pooled_statistic(gram, rng.permutation(2 * n), n, trace)
                           for _ in range(plan.num_perms)])
    exceed = int(np.count_nonzero(perm_stats >= observed))
    p = (1 + exceed) / (plan.num_perms + 1)
    # p <= alpha  <=>  observed > k-th largest permuted value, k = floor(alpha (B + 1))
    k_crit = math.floor(alpha * (plan.num_perms + 1) + 1e-12)
    threshold = float(np.sort(perm_stats)[::-1][k_crit - 1]) if k_crit >= 1 else math.inf
    diag = _diag(rk, data, start, num_perms=plan.num_perms, seed=plan.seed)
    return TestOutcome("mmd-perm", observed, threshold, p, p <= alpha, alpha, False, diag)


def block_statistics(data: PairedDataset, k: ResolvedKernel, block_size: int) -> np.ndarray:
    """Unbiased within-block MMD^2 estimates over consecutive complete blocks."""
    if block_size < 2:
        raise ValueError("block_size must be >= 2")
    nb = data.n // block_size
    out = np.empty(nb)
    for b in range(nb):
        blk = data.subset(slice(b * block_size, (b + 1) * block_size))
        out[b] = 2.0 * _fsum(row_sums(blk, [k])[0]) / (block_size * (block_size - 1))
    return out


def block_mmd_test(
    data: PairedDataset,
    k: KernelSpec | ResolvedKernel,
    block_size: int | None = None,
    alpha: float = 0.05,
) -> TestOutcome:
    """Block MMD; ``block_size`` defaults to floor(sqrt(n)). Remainder pairs are dropped."""
    _check_alpha(alpha)
    start = time.perf_counter_ns()
    if block_size is None:
        block_size = math.isqrt(data.n)
    if block_size < 2 or data.n // block_size < 2:
        raise ValueError(f"block MMD needs block_size >= 2 and two complete blocks (n={data.n}, B={block_size})")
    rk = resolve_bandwidth(k, data.x, data.y)
    stat, degenerate = _studentized(block_statistics(data, rk, block_size))
    return normal_outcome("block", stat, alpha, degenerate,
                          _diag(rk, data, start, block_size=block_size))


def linear_h(data: PairedDataset, k: ResolvedKernel) -> np.ndarray:
    """H(Z_{2m-1}, Z_{2m}) for m = 1..floor(n/2)."""
    m = data.n // 2
    xa, ya = data.x[0:2 * m:2], data.y[0:2 * m:2]
    xb, yb = data.x[1:2 * m:2], data.y[1:2 * m:2]
    met = k.metric
    if met == "dot":
        return rowwise(xa - ya, xb - yb, met)
    f = k.from_distance
    return f(rowwise(xa, xb, met)) - f(rowwise(xa, yb, met)) - f(rowwise(xb, ya, met)) + f(rowwise(ya, yb, met))


def linear_mmd_test(data: PairedDataset, k: KernelSpec | ResolvedKernel, alpha: float = 0.05) -> TestOutcome:
    _check_alpha(alpha)
    if data.n < 4:
        raise ValueError("linear-time MMD needs n >= 4")
    start = time.perf_counter_ns()
    rk = resolve_bandwidth(k, data.x, data.y)
    stat, degenerate = _studentized(linear_h(data, rk))
    return normal_outcome("linear", stat, alpha, degenerate, _diag(rk, data, start))


def cross_u(data: PairedDataset, k: ResolvedKernel) -> np.ndarray:
    """u_i = mean_{j in B} H(Z_i, Z_j) for i in A (A = first ceil(n/2) pairs)."""
    half = (data.n + 1) // 2
    xa, ya, xb, yb = data.x[:half], data.y[:half], data.x[half:], data.y[half:]
    if k.metric == "dot":
        h = (xa - ya) @ (xb - yb).T
    else:
        h = k.gram(xa, xb) - k.gram(xa, yb) - k.gram(ya, xb) + k.gram(ya, yb)
    return h.mean(axis=1)


def cross_mmd_test(data: PairedDataset, k: KernelSpec | ResolvedKernel, alpha: float = 0.05) -> TestOutcome:
    _check_alpha(alpha)
    if data.n < 4:
        raise ValueError("cross MMD needs n >= 4")
    start = time.perf_counter_ns()
    rk = resolve_bandwidth(k, data.x, data.y)
    stat, degenerate = _studentized(cross_u(data, rk))
    return normal_outcome("cross", stat, alpha, degenerate, _diag(rk, data, start))

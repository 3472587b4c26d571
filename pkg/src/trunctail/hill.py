"""Hill estimation with a data-driven number of upper order statistics.

The number k is either user-supplied or chosen from the sample as
``k = [n * (fraction of points above gamma * max)^beta]``, which keeps the
estimator consistent under truncation in every regime.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ArgumentError, CannotBoundError, DegenerateSampleError

__all__ = [
    "HillEstimate",
    "AlphaBound",
    "hill_statistic",
    "random_k",
    "hill_random_k",
    "hill_grid",
    "alpha_upper_bound",
    "write_grid_csv",
]


@dataclass(frozen=True)
class HillEstimate:
    """Hill statistic (estimates 1/alpha) with its provenance."""

    h: float
    k: int
    n: int
    beta: Optional[float] = None
    gamma: Optional[float] = None


@dataclass(frozen=True, eq=False)
class AlphaBound:
    """Conservative tail-exponent upper bound aggregated from a Hill grid."""

    a_upper: float
    grid: tuple
    margin: float
    rule: str = "margin-max"


def _as_sample(sample) -> np.ndarray:
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ArgumentError("sample is empty")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("sample contains non-finite values")
    if np.any(x < 0):
        raise ArgumentError("Hill operations need nonnegative inputs; pass absolute values")
    return x


def _sorted_desc(sample) -> np.ndarray:
    return np.sort(_as_sample(sample))[::-1]


def _hill_from_sorted(desc: np.ndarray, k: int) -> float:
    if not 1 <= k <= desc.size:
        raise ArgumentError(f"k={k} out of range 1..{desc.size}")
    xk = desc[k - 1]
    if xk <= 0.0:
        raise DegenerateSampleError("k-th order statistic is zero")
    return float(np.mean(np.log(desc[:k] / xk)))


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ArgumentError(f"{name} must lie in (0, 1), got {value}")


def _random_k_from_sorted(desc: np.ndarray, gamma: float, beta: float) -> int:
    _check_unit_interval("gamma", gamma)
    if not 0.0 < beta <= 1.0:
        raise ArgumentError(f"beta must lie in (0, 1], got {beta}")
    mx = desc[0]
    if mx <= 0.0:
        raise DegenerateSampleError("sample maximum is zero")
    n = desc.size
    # strict inequality; descending order makes this a prefix count
    count = int(np.searchsorted(-desc, -gamma * mx, side="left"))
    if beta == 1.0:
        return count  # n (count/n)^1, exactly
    v = n * (count / n) ** beta
    # integer part; the tiny relative slack keeps exact-integer cases
    # (perfect powers) from dropping a unit to float rounding
    k = int(math.floor(v * (1.0 + 1e-12) + 1e-12))
    return min(max(k, 1), n)


def hill_statistic(sample, k: int) -> HillEstimate:
    """Mean log-ratio of the top k order statistics to the k-th."""
    desc = _sorted_desc(sample)
    return HillEstimate(h=_hill_from_sorted(desc, k), k=k, n=desc.size)


def random_k(sample, gamma: float, beta: float) -> int:
    """Sample-driven k = [n * (#(X > gamma max) / n)^beta], always in 1..n."""
    return _random_k_from_sorted(_sorted_desc(sample), gamma, beta)


def hill_random_k(sample, gamma: float, beta: float) -> HillEstimate:
    """Hill statistic evaluated at the data-driven k, with (beta, gamma) recorded."""
    desc = _sorted_desc(sample)
    k = _random_k_from_sorted(desc, gamma, beta)
    return HillEstimate(h=_hill_from_sorted(desc, k), k=k, n=desc.size, beta=beta, gamma=gamma)


def hill_grid(sample, betas: Sequence[float], gammas: Sequence[float]) -> list[HillEstimate]:
    """One estimate per (beta, gamma) pair; the sample is sorted once."""
    if len(betas) == 0 or len(gammas) == 0:
        raise ArgumentError("beta and gamma grids must be nonempty")
    desc = _sorted_desc(sample)
    out = []
    for beta in betas:
        for gamma in gammas:
            k = _random_k_from_sorted(desc, gamma, beta)
            out.append(
                HillEstimate(h=_hill_from_sorted(desc, k), k=k, n=desc.size, beta=beta, gamma=gamma)
            )
    return out


def alpha_upper_bound(grid: Iterable[HillEstimate], margin: float = 1.1) -> AlphaBound:
    """margin * max over the grid of 1/h; conservative when margin >= 1."""
    grid = tuple(grid)
    if not grid:
        raise ArgumentError("grid is empty")
    if margin <= 0:
        raise ArgumentError("margin must be positive")
    hs = np.array([e.h for e in grid])
    if np.any(hs == 0.0):
        raise CannotBoundError("a grid estimate is zero; 1/h undefined")
    return AlphaBound(a_upper=float(margin / hs.min()), grid=grid, margin=margin)


def write_grid_csv(estimates: Iterable[HillEstimate], path) -> None:
    """Flat table (beta, gamma, k, h) for external plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "gamma", "k", "h"])
        for e in estimates:
            writer.writerow([e.beta, e.gamma, e.k, repr(e.h)])

"""Empirical verification of the partial-sum limit theorems.

Standardized row sums of the truncated model converge to

* the alpha-stable law of the non-truncated sums under soft truncation
  (same b_n scaling, same centering);
* a centered Gaussian with covariance (2/(2-alpha)) int s s' dGamma~ under
  hard truncation, with B_n = [n m_n^2 P(||H|| > m_n)]^(1/2);
* an infinitely divisible law with jumps cut at delta^(-1/alpha)
  (Gamma(S)/alpha)^(1/alpha) plus a Poisson number of sphere-sized atoms in
  the intermediate regime n P(||H|| > m_n) -> delta.

This module generates the standardized sums, evaluates the intermediate-law
characteristic function by quadrature, and provides Gaussian / stable-oracle
diagnostics.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import kolmogi, ndtr

from . import _kernels
from .errors import ArgumentError
from .rng import SeedLike, child, seed_sequence
from .tail_model import (
    HeavyTailSpec,
    SpectralMeasure,
    TailModelConfig,
    scaling_Bn,
    scaling_bn,
    truncated_mean_vector,
)

__all__ = [
    "SumExperiment",
    "StableLimitSpec",
    "run_sums",
    "gaussian_covariance",
    "canonical_stable_limit",
    "rho_delta_cf",
    "c_alpha",
    "stable_limit_sigma",
    "NormalityDiagnostic",
    "normality_check",
    "empirical_cf",
    "write_sums_csv",
]

_CENTERINGS = ("none", "theoretical", "empirical")
_SCALINGS = ("Bn", "bn")


@dataclass(frozen=True, eq=False)
class SumExperiment:
    """Replicated standardized row sums of one truncated model."""

    config: TailModelConfig
    n: int
    reps: int
    seed: SeedLike = 0
    centering: str = "none"
    scaling: str = "Bn"

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("need n >= 1")
        if self.reps < 100:
            raise ArgumentError("need reps >= 100")
        if self.centering not in _CENTERINGS:
            raise ArgumentError(f"centering must be one of {_CENTERINGS}")
        if self.scaling not in _SCALINGS:
            raise ArgumentError(f"scaling must be one of {_SCALINGS}")

    def to_dict(self) -> dict:
        from .rng import seed_label

        return {
            "config": self.config.to_dict(),
            "n": self.n,
            "reps": self.reps,
            "seed": seed_label(self.seed),
            "centering": self.centering,
            "scaling": self.scaling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SumExperiment":
        return cls(
            config=TailModelConfig.from_dict(d["config"]),
            n=d["n"],
            reps=d["reps"],
            seed=d["seed"],
            centering=d["centering"],
            scaling=d["scaling"],
        )


def run_sums(exp: SumExperiment) -> np.ndarray:
    """Standardized sums, shape (reps, d); replicate i uses child seed i."""
    config = exp.config
    spec = config.heavy
    if exp.scaling == "bn":
        if spec.alpha >= 2.0:
            raise ArgumentError("bn scaling needs alpha < 2")
        denom = scaling_bn(exp.n, spec)
    else:
        denom = scaling_Bn(exp.n, config)
    m = config.truncation_level(exp.n)
    spectral = spec.spectral
    weights = spectral.weights / spectral.total_mass
    dir_cdf = np.cumsum(weights)
    dir_cdf[-1] = 1.0  # guard the kernel's prefix search against rounding
    res_kind, res_param = config.residual._kernel_args()
    root = seed_sequence(exp.seed)
    sums = np.empty((exp.reps, config.dimension))
    out = np.empty(config.dimension)
    for i in range(exp.reps):
        gen = np.random.default_rng(child(root, i))
        _kernels.truncated_row_sum(
            gen, exp.n, spec.alpha, spec.scale, dir_cdf, spectral.directions, m,
            res_kind, res_param, out,
        )
        sums[i] = out
    if exp.centering == "theoretical":
        sums -= exp.n * truncated_mean_vector(config, exp.n)
    elif exp.centering == "empirical":
        sums -= sums.mean(axis=0)
    sums /= denom
    return sums


def gaussian_covariance(alpha: float, spectral: SpectralMeasure) -> np.ndarray:
    """Hard-regime limit covariance (2/(2-alpha)) sum_k w~_k s_k s_k'."""
    if not 0.0 < alpha < 2.0:
        raise ArgumentError("need alpha in (0, 2)")
    w = spectral.weights / spectral.total_mass
    dirs = spectral.directions
    return 2.0 / (2.0 - alpha) * (dirs.T * w) @ dirs


@dataclass(frozen=True, eq=False)
class StableLimitSpec:
    """Levy triplet of the alpha-stable limit: shift and (unnormalized) spectral part."""

    alpha: float
    gamma_shift: np.ndarray  # (d,)
    spectral: SpectralMeasure

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ArgumentError("need alpha in (0, 2)")
        g = np.asarray(self.gamma_shift, dtype=np.float64).ravel()
        if g.size != self.spectral.dimension:
            raise ArgumentError("gamma_shift dimension does not match spectral atoms")
        object.__setattr__(self, "gamma_shift", g)


def canonical_stable_limit(spec: HeavyTailSpec) -> StableLimitSpec:
    """Stable limit of b_n^-1 sum H_j (no centering) for the canonical Pareto model.

    With b_n = scale n^(1/alpha) the Levy measure is alpha x^-(1+alpha) dx
    times the normalized spectral measure, i.e. Gamma = alpha * Gamma~.
    Requires a symmetric spectral measure so the zero shift is exact.
    """
    if np.linalg.norm(spec.spectral.mean_direction()) > 1e-12:
        raise ArgumentError("canonical limit needs a symmetric spectral measure")
    d = spec.dimension
    return StableLimitSpec(
        alpha=spec.alpha,
        gamma_shift=np.zeros(d),
        spectral=spec.spectral.normalized().scaled(spec.alpha),
    )


def _levy_integral(u: float, alpha: float, x_max: float) -> complex:
    """int_0^xmax (e^(ixu) - 1 - ixu 1(x<=1)) x^-(1+alpha) dx, adaptive quadrature."""
    if u == 0.0:
        return 0.0 + 0.0j
    a = min(1.0, x_max)
    opts = {"epsabs": 1e-12, "epsrel": 1e-9, "limit": 400}
    re, _ = quad(lambda x: (math.cos(u * x) - 1.0) * x ** (-1.0 - alpha), 0.0, a, **opts)
    im, _ = quad(lambda x: (math.sin(u * x) - u * x) * x ** (-1.0 - alpha), 0.0, a, **opts)
    if x_max > 1.0:
        re2, _ = quad(lambda x: (math.cos(u * x) - 1.0) * x ** (-1.0 - alpha), 1.0, x_max, **opts)
        im2, _ = quad(lambda x: math.sin(u * x) * x ** (-1.0 - alpha), 1.0, x_max, **opts)
        re += re2
        im += im2
    return complex(re, im)


def rho_delta_cf(t, delta: float, limit: StableLimitSpec) -> complex:
    """Characteristic function of the intermediate-regime limit law.

    Jumps of the stable Levy measure are cut at
    x_max = delta^(-1/alpha) (Gamma(S)/alpha)^(1/alpha); the mass beyond
    reappears as a Poisson(delta) number of atoms of size x_max on the
    sphere, and the compensator mass lost on (x_max, 1] moves into the shift.
    """
    if delta <= 0 or not math.isfinite(delta):
        raise ArgumentError("need delta > 0")
    t = np.asarray(t, dtype=np.float64).ravel()
    if t.size != limit.spectral.dimension:
        raise ArgumentError("t dimension does not match the limit law")
    alpha = limit.alpha
    total = limit.spectral.total_mass
    x_max = delta ** (-1.0 / alpha) * (total / alpha) ** (1.0 / alpha)
    if x_max >= 1.0:
        shift_corr = 0.0
    elif alpha == 1.0:
        shift_corr = -math.log(x_max)
    else:
        shift_corr = (1.0 - x_max ** (1.0 - alpha)) / (1.0 - alpha)
    gamma_delta = limit.gamma_shift - shift_corr * (limit.spectral.weights @ limit.spectral.directions)
    exponent = 1j * float(t @ gamma_delta)
    for s_k, w_k in zip(limit.spectral.directions, limit.spectral.weights):
        u = float(t @ s_k)
        atom = delta / total * (cmath.exp(1j * x_max * u) - 1.0)
        exponent += w_k * (_levy_integral(u, alpha, x_max) + atom)
    return cmath.exp(exponent)


def c_alpha(alpha: float) -> float:
    """Normalizing constant (Gamma(1-alpha) cos(pi alpha/2))^-1, 2/pi at alpha = 1."""
    if not 0.0 < alpha < 2.0:
        raise ArgumentError("need alpha in (0, 2)")
    if alpha == 1.0:
        return 2.0 / math.pi
    return 1.0 / (math.gamma(1.0 - alpha) * math.cos(math.pi * alpha / 2.0))


def stable_limit_sigma(alpha: float) -> float:
    """Scale of the symmetric stable limit of b_n^-1 sum H_j: (1/C_alpha)^(1/alpha)."""
    return (1.0 / c_alpha(alpha)) ** (1.0 / alpha)


@dataclass(frozen=True)
class NormalityDiagnostic:
    statistic: float
    threshold: float
    level: float
    n: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "level": self.level,
            "n": self.n,
            "passed": self.passed,
        }


def normality_check(values, variance: float, level: float = 0.01) -> NormalityDiagnostic:
    """Kolmogorov-Smirnov distance against the centered Gaussian with ``variance``.

    Passes when sqrt(n) times the distance stays under the asymptotic
    Kolmogorov critical value at ``level``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    n = v.size
    if n < 1000:
        raise ArgumentError("need at least 1000 values")
    if variance <= 0 or not math.isfinite(variance):
        raise ArgumentError("need variance > 0")
    f = ndtr(np.sort(v) / math.sqrt(variance))
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    threshold = float(kolmogi(level)) / math.sqrt(n)
    return NormalityDiagnostic(
        statistic=d, threshold=threshold, level=level, n=n, passed=d <= threshold
    )


def empirical_cf(values, ts) -> np.ndarray:
    """Empirical characteristic function of a scalar sample at each t."""
    v = np.asarray(values, dtype=np.float64).ravel()
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    return np.exp(1j * np.outer(ts, v)).mean(axis=1)


def write_sums_csv(sums, path) -> None:
    """Dump standardized sums (reps, d) as CSV for external plotting."""
    arr = np.atleast_2d(np.asarray(sums, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(arr.shape[1])])
        for row in arr:
            writer.writerow([repr(float(v)) for v in row])

"""Truncated heavy-tail model: generators, regime classification, scalings.

The canonical heavy law is radial Pareto: ``R`` has survival function
``(x / scale)^(-alpha)`` for ``x >= scale`` and the direction is drawn from a
discrete spectral measure on the unit sphere.  Vectors whose norm exceeds the
truncation level ``m`` are pushed back to the sphere of radius ``m`` plus a
nonnegative residual, keeping their direction.  The exact power law makes the
scaling sequences, regime boundaries and truncated moments closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ArgumentError, ConfigurationError
from .rng import SeedLike, generator

__all__ = [
    "SpectralMeasure",
    "HeavyTailSpec",
    "TruncationRule",
    "ResidualSpec",
    "TailModelConfig",
    "Regime",
    "sample_heavy",
    "truncate_row",
    "simulate_sample",
    "classify_regime",
    "scaling_bn",
    "scaling_Bn",
    "sample_stable",
    "truncated_radial_mean",
    "truncated_radial_second_moment",
    "truncated_mean_vector",
]

_UNIT_NORM_TOL = 1e-12


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Discrete measure on the unit sphere: rows of ``directions`` with ``weights``."""

    directions: np.ndarray  # (n_atoms, d), unit rows
    weights: np.ndarray  # (n_atoms,), nonnegative

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=np.float64))
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if dirs.shape[0] != w.shape[0] or dirs.shape[0] == 0:
            raise ConfigurationError("directions and weights must be equally many atoms")
        if not np.all(np.isfinite(dirs)) or not np.all(np.isfinite(w)):
            raise ConfigurationError("spectral measure has non-finite entries")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
            raise ConfigurationError("spectral directions must have unit norm")
        if np.any(w < 0):
            raise ConfigurationError("spectral weights must be nonnegative")
        if w.sum() <= 0:
            raise ConfigurationError("spectral measure must have positive total mass")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "SpectralMeasure":
        return SpectralMeasure(self.directions, self.weights / self.total_mass)

    def scaled(self, factor: float) -> "SpectralMeasure":
        return SpectralMeasure(self.directions, self.weights * float(factor))

    def mean_direction(self) -> np.ndarray:
        """Normalized first moment: sum_k w_k s_k / total mass."""
        return (self.weights / self.total_mass) @ self.directions

    @staticmethod
    def symmetric_1d() -> "SpectralMeasure":
        return SpectralMeasure(np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]))

    @staticmethod
    def one_sided_1d() -> "SpectralMeasure":
        return SpectralMeasure(np.array([[1.0]]), np.array([1.0]))

    def to_dict(self) -> dict:
        return {"directions": self.directions.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralMeasure":
        return cls(np.asarray(d["directions"]), np.asarray(d["weights"]))


def _default_spectral() -> SpectralMeasure:
    return SpectralMeasure.symmetric_1d()


@dataclass(frozen=True, eq=False)
class HeavyTailSpec:
    """Radial Pareto law: tail exponent, scale, and normalized directional measure."""

    alpha: float
    scale: float = 1.0
    spectral: SpectralMeasure = field(default_factory=_default_spectral)

    def __post_init__(self):
        if not _finite(self.alpha, self.scale) or self.alpha <= 0 or self.scale <= 0:
            raise ConfigurationError("alpha and scale must be finite and positive")
        if abs(self.spectral.total_mass - 1.0) > _UNIT_NORM_TOL:
            raise ConfigurationError("heavy-tail spectral weights must sum to 1")

    @property
    def dimension(self) -> int:
        return self.spectral.dimension

    def survival(self, x):
        """Exact radial survival P(||H|| > x)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.minimum(1.0, (x / self.scale) ** (-self.alpha))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "scale": self.scale, "spectral": self.spectral.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "HeavyTailSpec":
        return cls(d["alpha"], d["scale"], SpectralMeasure.from_dict(d["spectral"]))


@dataclass(frozen=True)
class TruncationRule:
    """Truncation level m(n) = coefficient * n^exponent."""

    coefficient: float
    exponent: float

    def __post_init__(self):
        if not _finite(self.coefficient, self.exponent):
            raise ConfigurationError("truncation rule fields must be finite")
        if self.coefficient <= 0 or self.exponent < 0:
            raise ConfigurationError("need coefficient > 0 and exponent >= 0")

    def level(self, n: int) -> float:
        return self.coefficient * float(n) ** self.exponent


@dataclass(frozen=True)
class ResidualSpec:
    """Law of the nonnegative overshoot added beyond the truncation level."""

    kind: str  # "zero" | "exponential" | "uniform"
    rate: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if self.kind == "zero":
            pass
        elif self.kind == "exponential":
            if self.rate is None or not _finite(self.rate) or self.rate <= 0:
                raise ConfigurationError("exponential residual needs rate > 0")
        elif self.kind == "uniform":
            if self.upper is None or not _finite(self.upper) or self.upper <= 0:
                raise ConfigurationError("uniform residual needs upper > 0")
        else:
            raise ConfigurationError(f"unknown residual kind {self.kind!r}")

    @staticmethod
    def zero() -> "ResidualSpec":
        return ResidualSpec("zero")

    @staticmethod
    def exponential(rate: float) -> "ResidualSpec":
        return ResidualSpec("exponential", rate=rate)

    @staticmethod
    def uniform_bounded(upper: float) -> "ResidualSpec":
        return ResidualSpec("uniform", upper=upper)

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        if self.kind == "exponential":
            return gen.standard_exponential(n) / self.rate
        if self.kind == "uniform":
            return gen.random(n) * self.upper
        return np.zeros(n)

    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "uniform":
            return self.upper / 2.0
        return 0.0

    def bound(self) -> float:
        """Essential supremum of the residual (inf for exponential)."""
        if self.kind == "exponential":
            return math.inf
        if self.kind == "uniform":
            return self.upper
        return 0.0

    def _kernel_args(self):
        if self.kind == "exponential":
            return _kernels.RESIDUAL_EXPONENTIAL, self.rate
        if self.kind == "uniform":
            return _kernels.RESIDUAL_UNIFORM, self.upper
        return _kernels.RESIDUAL_ZERO, 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rate": self.rate, "upper": self.upper}

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualSpec":
        return cls(d["kind"], rate=d.get("rate"), upper=d.get("upper"))


@dataclass(frozen=True, eq=False)
class TailModelConfig:
    """One row family of the triangular array: heavy law, truncation rule, residual."""

    heavy: HeavyTailSpec
    truncation: TruncationRule
    residual: ResidualSpec = field(default_factory=ResidualSpec.zero)
    dimension: Optional[int] = None

    def __post_init__(self):
        d = self.heavy.dimension
        if self.dimension is None:
            object.__setattr__(self, "dimension", d)
        elif self.dimension != d:
            raise ConfigurationError(
                f"dimension {self.dimension} does not match spectral atoms in R^{d}"
            )

    def truncation_level(self, n: int) -> float:
        return self.truncation.level(n)

    def to_dict(self) -> dict:
        return {
            "heavy": self.heavy.to_dict(),
            "truncation": {
                "coefficient": self.truncation.coefficient,
                "exponent": self.truncation.exponent,
            },
            "residual": self.residual.to_dict(),
            "dimension": self.dimension,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TailModelConfig":
        return cls(
            heavy=HeavyTailSpec.from_dict(d["heavy"]),
            truncation=TruncationRule(**d["truncation"]),
            residual=ResidualSpec.from_dict(d["residual"]),
            dimension=d.get("dimension"),
        )


@dataclass(frozen=True)
class Regime:
    """Truncation regime: soft, hard, or intermediate with its limit constant delta."""

    tag: str  # "soft" | "hard" | "intermediate"
    delta: Optional[float] = None

    @property
    def is_soft(self) -> bool:
        return self.tag == "soft"

    @property
    def is_hard(self) -> bool:
        return self.tag == "hard"

    @property
    def is_intermediate(self) -> bool:
        return self.tag == "intermediate"


def sample_heavy(n: int, spec: HeavyTailSpec, seed: SeedLike = None) -> np.ndarray:
    """n i.i.d. draws of radius * direction, shape (n, d)."""
    if n < 1:
        raise ArgumentError("need n >= 1")
    gen = generator(seed)
    weights = spec.spectral.weights / spec.spectral.total_mass
    idx = gen.choice(weights.size, size=n, p=weights)
    # 1 - random() is in (0, 1], so radii stay finite and >= scale
    radii = spec.scale * (1.0 - gen.random(n)) ** (-1.0 / spec.alpha)
    return radii[:, None] * spec.spectral.directions[idx]


def truncate_row(h, m: float, residual: ResidualSpec, seed: SeedLike = None) -> np.ndarray:
    """Push every vector with norm above m back to norm m + residual draw.

    Direction is preserved; entries with norm <= m pass through unchanged.
    Accepts shape (n, d) or a flat 1-d array (treated as d = 1) and returns
    the same shape it was given.
    """
    if not _finite(m) or m <= 0:
        raise ConfigurationError("truncation level m must be positive")
    h = np.asarray(h, dtype=np.float64)
    flat = h.ndim == 1
    h2 = h[:, None] if flat else h
    gen = generator(seed)
    norms = np.linalg.norm(h2, axis=1)
    r = residual.sample(h2.shape[0], gen)
    out = h2.copy()
    mask = norms > m
    if mask.any():
        out[mask] = h2[mask] / norms[mask, None] * (m + r[mask])[:, None]
    return out[:, 0] if flat else out


def simulate_sample(config: TailModelConfig, n: int, seed: SeedLike = None) -> np.ndarray:
    """One row of the triangular array at row length n, shape (n, d)."""
    gen = generator(seed)
    h = sample_heavy(n, config.heavy, gen)
    return truncate_row(h, config.truncation_level(n), config.residual, gen)


def classify_regime(config: TailModelConfig) -> Regime:
    """Sign of 1 - alpha*rho decides: n P(||H|| > m_n) ~ n^(1 - alpha*rho)."""
    alpha = config.heavy.alpha
    rho = config.truncation.exponent
    growth = 1.0 - alpha * rho
    if growth > 0:
        return Regime("hard")
    if growth < 0:
        return Regime("soft")
    delta = config.truncation.coefficient ** (-alpha) * config.heavy.scale**alpha
    return Regime("intermediate", delta=delta)


def scaling_bn(n: int, spec: HeavyTailSpec) -> float:
    """Quantile scaling for the non-truncated sums: scale * n^(1/alpha)."""
    if n < 1:
        raise ArgumentError("need n >= 1")
    return spec.scale * float(n) ** (1.0 / spec.alpha)


def scaling_Bn(n: int, config: TailModelConfig) -> float:
    """Gaussian-regime scaling [n m_n^2 P(||H|| > m_n)]^(1/2)."""
    if n < 1:
        raise ArgumentError("need n >= 1")
    m = config.truncation_level(n)
    return math.sqrt(n * m * m * config.heavy.survival(m))


def sample_stable(
    n: int,
    alpha: float,
    beta: float = 0.0,
    sigma: float = 1.0,
    mu: float = 0.0,
    seed: SeedLike = None,
) -> np.ndarray:
    """Chambers-Mallows-Stuck draws from the alpha-stable law S_alpha(sigma, beta, mu).

    The skewed alpha = 1 case has a different scaling law and is not supported.
    alpha = 2 is allowed and gives the Gaussian with variance 2 sigma^2.
    """
    if n < 1:
        raise ArgumentError("need n >= 1")
    if not _finite(alpha, beta, sigma, mu):
        raise ConfigurationError("stable parameters must be finite")
    if not 0 < alpha <= 2:
        raise ConfigurationError("alpha must lie in (0, 2]")
    if not -1 <= beta <= 1:
        raise ConfigurationError("beta must lie in [-1, 1]")
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive")
    if alpha == 1 and beta != 0:
        raise ConfigurationError("skewed alpha = 1 stable laws are not supported")
    gen = generator(seed)
    v = math.pi * (gen.random(n) - 0.5)
    w = gen.standard_exponential(n)
    if alpha == 1:
        x = np.tan(v)
    else:
        t = beta * math.tan(math.pi * alpha / 2.0)
        b = math.atan(t) / alpha
        s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
        x = (
            s
            * np.sin(alpha * (v + b))
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
        )
    return mu + sigma * x


def truncated_radial_mean(spec: HeavyTailSpec, m: float) -> float:
    """Exact E[R 1(R <= m)] for the Pareto radius."""
    alpha, scale = spec.alpha, spec.scale
    if m <= scale:
        return 0.0
    if alpha == 1:
        return scale * math.log(m / scale)
    return alpha / (alpha - 1.0) * (scale - scale**alpha * m ** (1.0 - alpha))


def truncated_radial_second_moment(spec: HeavyTailSpec, m: float) -> float:
    """Exact E[R^2 1(R <= m)] for the Pareto radius."""
    alpha, scale = spec.alpha, spec.scale
    if m <= scale:
        return 0.0
    if alpha == 2:
        return 2.0 * scale * scale * math.log(m / scale)
    return alpha / (2.0 - alpha) * (scale**alpha * m ** (2.0 - alpha) - scale * scale)


def truncated_mean_vector(config: TailModelConfig, n: int) -> np.ndarray:
    """Exact E[X] for one truncated observation at row length n, shape (d,)."""
    spec = config.heavy
    m = config.truncation_level(n)
    radial = truncated_radial_mean(spec, m) + (m + config.residual.mean()) * spec.survival(m)
    return radial * spec.spectral.mean_direction()

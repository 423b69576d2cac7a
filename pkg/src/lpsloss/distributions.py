"""Job-length distributions and arrival-rate profiles.

Each length law knows its exact mean and Laplace-Stieltjes transform and
can draw reproducible samples from a caller-owned generator. Distribution
objects are immutable and safe to share between runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LengthDistribution",
    "Deterministic",
    "Exponential",
    "ZeroInflatedExponential",
    "Hyperexponential",
    "ArrivalRates",
]

_WEIGHT_TOL = 1e-12


class LengthDistribution:
    """Base class for job-length laws. Subclasses are frozen dataclasses."""

    #: True when the law puts positive mass on length exactly zero.
    has_zero_atom = False

    def mean(self) -> float:
        raise NotImplementedError

    def lst(self, s: float) -> float:
        """E[exp(-s*L)] for job length L; s must be >= 0."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> float:
        """One draw. Consumes the stream exactly like sample_block(rng, 1)."""
        return float(self.sample_block(rng, 1)[0])

    def sample_block(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def _check_s(self, s: float) -> None:
        if s < 0:
            raise ValueError(f"LST argument must be nonnegative, got {s}")


@dataclass(frozen=True)
class Deterministic(LengthDistribution):
    """Every job has the same length b > 0."""

    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"deterministic length must be positive, got {self.b}")

    def mean(self) -> float:
        return self.b

    def lst(self, s: float) -> float:
        self._check_s(s)
        return math.exp(-s * self.b)

    def sample_block(self, rng, size):
        return np.full(size, self.b)


@dataclass(frozen=True)
class Exponential(LengthDistribution):
    """Exponential law with rate mu (mean 1/mu)."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"rate must be positive, got {self.mu}")

    def mean(self) -> float:
        return 1.0 / self.mu

    def lst(self, s: float) -> float:
        self._check_s(s)
        return self.mu / (s + self.mu)

    def sample_block(self, rng, size):
        return rng.exponential(1.0 / self.mu, size)


@dataclass(frozen=True)
class ZeroInflatedExponential(LengthDistribution):
    """Length 0 with probability 1-alpha, else exponential with rate mu.

    The mean is alpha/mu. alpha = 0 is rejected: a law that is identically
    zero has mean zero and no system quantity below is defined for it.
    """

    alpha: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"zero-inflation needs 0 < alpha <= 1, got {self.alpha}")
        if not self.mu > 0:
            raise ValueError(f"rate must be positive, got {self.mu}")

    @property
    def has_zero_atom(self) -> bool:
        return self.alpha < 1.0

    def mean(self) -> float:
        return self.alpha / self.mu

    def lst(self, s: float) -> float:
        self._check_s(s)
        return 1.0 - self.alpha * s / (s + self.mu)

    def sample_block(self, rng, size):
        # Order matters for reproducibility: uniforms first, then the
        # exponential branch; zero draws discard their branch variate.
        keep = rng.random(size) < self.alpha
        draws = rng.exponential(1.0 / self.mu, size)
        return np.where(keep, draws, 0.0)


@dataclass(frozen=True)
class Hyperexponential(LengthDistribution):
    """Mixture of exponentials given as (weight, rate) branches.

    Used as a controllable high-variance law; weights must sum to 1
    within 1e-12.
    """

    branches: tuple[tuple[float, float], ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)
    _rates: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.branches:
            raise ValueError("hyperexponential needs at least one branch")
        branches = tuple((float(w), float(r)) for w, r in self.branches)
        object.__setattr__(self, "branches", branches)
        weights = np.array([w for w, _ in branches])
        rates = np.array([r for _, r in branches])
        if np.any(weights < 0):
            raise ValueError("branch weights must be nonnegative")
        if np.any(rates <= 0):
            raise ValueError("branch rates must be positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"branch weights must sum to 1, got {weights.sum()!r}")
        object.__setattr__(self, "_cum", np.cumsum(weights))
        object.__setattr__(self, "_rates", rates)

    @classmethod
    def from_mean_scv(cls, mean: float, scv: float) -> "Hyperexponential":
        """Two-branch law with given mean and squared coefficient of
        variation >= 1, balanced so each branch carries half the mean."""
        if not mean > 0:
            raise ValueError("mean must be positive")
        if scv < 1:
            raise ValueError("hyperexponential needs scv >= 1")
        p = 0.5 * (1.0 + math.sqrt((scv - 1.0) / (scv + 1.0)))
        return cls(((p, 2.0 * p / mean), (1.0 - p, 2.0 * (1.0 - p) / mean)))

    def mean(self) -> float:
        return sum(w / r for w, r in self.branches)

    def lst(self, s: float) -> float:
        self._check_s(s)
        return sum(w * r / (s + r) for w, r in self.branches)

    def sample_block(self, rng, size):
        idx = np.searchsorted(self._cum, rng.random(size))
        idx = np.minimum(idx, len(self.branches) - 1)
        return rng.standard_exponential(size) / self._rates[idx]


@dataclass(frozen=True)
class ArrivalRates:
    """State-dependent Poisson arrival rates lambda_0..lambda_n.

    rates[i] is the arrival rate while i jobs are present; the list has
    one entry per occupancy level 0..n.
    """

    rates: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "rates", rates)
        if not rates:
            raise ValueError("need at least one arrival rate")
        if any(r < 0 for r in rates):
            raise ValueError("arrival rates must be nonnegative")

    @classmethod
    def constant(cls, lam: float, n: int) -> "ArrivalRates":
        """One replicated rate for levels 0..n."""
        return cls((float(lam),) * (n + 1))

    @property
    def capacity(self) -> int:
        return len(self.rates) - 1

    @property
    def is_constant(self) -> bool:
        return len(set(self.rates)) == 1

    def at(self, i: int) -> float:
        """Rate with i jobs present; levels beyond the top reuse the top rate."""
        return self.rates[min(i, len(self.rates) - 1)]

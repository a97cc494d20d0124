"""Scalar probability primitives: Gaussian tail, Gaussian mixtures, Poisson binomial."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfc

_SQRT2 = math.sqrt(2.0)
_WEIGHT_TOL = 1e-9


def gaussian_q(x):
    """Standard normal tail probability P(Z > x).

    Evaluated as erfc(x / sqrt(2)) / 2, which keeps full relative precision far
    into the upper tail (absolute error well below 1e-10 everywhere).
    Accepts scalars or arrays; non-finite input raises ``ValueError``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"gaussian_q needs finite input, got {x!r}")
    out = 0.5 * erfc(arr / _SQRT2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianDist:
    """Normal law N(mean, std**2); ``std == 0`` is a point mass at ``mean``."""

    mean: float
    std: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.mean) or not math.isfinite(self.std):
            raise ValueError("GaussianDist parameters must be finite")
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")

    @property
    def var(self) -> float:
        return self.std**2

    def ccdf(self, x):
        """P(X >= x). Point masses use the indicator 1{mean >= x}."""
        x = np.asarray(x, dtype=float)
        if self.std == 0:
            out = (self.mean >= x).astype(float)
        else:
            with np.errstate(over="ignore"):  # tiny std: z = +-inf, erfc handles it
                z = (x - self.mean) / self.std
            out = 0.5 * erfc(z / _SQRT2)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.std == 0:
            out = (x >= self.mean).astype(float)
        else:
            with np.errstate(over="ignore"):
                z = (x - self.mean) / self.std
            out = 0.5 * erfc(-z / _SQRT2)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        """Density; undefined for point masses (raises)."""
        if self.std == 0:
            raise ValueError("degenerate distribution has no density")
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.std
        out = np.exp(-0.5 * z * z) / (self.std * math.sqrt(2 * math.pi))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianMixture:
    components: tuple[tuple[float, GaussianDist], ...] = field()

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = [w for w, _ in comps]
        if any(w < 0 or w > 1 for w in weights):
            raise ValueError("mixture weights must lie in [0, 1]")
        if abs(math.fsum(weights) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"mixture weights sum to {math.fsum(weights)!r}, not 1")

    @classmethod
    def from_arrays(cls, weights: Iterable[float], dists: Iterable[GaussianDist]):
        return cls(tuple(zip(weights, dists)))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([d.mean for _, d in self.components])

    @property
    def stds(self) -> np.ndarray:
        return np.array([d.std for _, d in self.components])

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def ccdf(self, x):
        return mixture_ccdf(self, x)

    def cdf(self, x):
        out = 1.0 - np.asarray(mixture_ccdf(self, x))
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for w, d in self.components:
            if w > 0:
                total = total + w * d.pdf(x)
        return float(total) if total.ndim == 0 else total

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(len(self.components), size=size, p=self.weights / self.weights.sum())
        return self.means[idx] + self.stds[idx] * rng.standard_normal(size)


def mixture_ccdf(m: GaussianMixture, x):
    """Weighted tail sum P(X >= x) over the mixture components."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for w, d in m.components:
        total = total + w * np.asarray(d.ccdf(x))
    return float(total) if total.ndim == 0 else total


def poisson_binomial_pmf(success_probs: Sequence[float], k: int | None = None):
    """Law of the number of successes among independent Bernoulli trials.

    Uses the O(n^2) convolution recurrence on the generating polynomial
    prod_i (1 - p_i + p_i z). Returns the full PMF vector (length n + 1) when
    ``k`` is None, otherwise the single probability P(K = k).
    """
    probs = np.asarray(success_probs, dtype=float).ravel()
    if np.any((probs < 0) | (probs > 1)) or not np.all(np.isfinite(probs)):
        raise ValueError("success probabilities must lie in [0, 1]")
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for i, p in enumerate(probs):
        pmf[1 : i + 2] = pmf[1 : i + 2] * (1 - p) + pmf[: i + 1] * p
        pmf[0] *= 1 - p
    if k is None:
        return pmf
    if not 0 <= k <= len(probs):
        raise ValueError(f"k={k} outside 0..{len(probs)}")
    return float(pmf[k])


@dataclass(frozen=True)
class BlockerCountDistribution:
    """P(k blockers | d_tr) for k = 0..B; entry 0 is the LoS probability."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(math.fsum(p) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"blocker PMF sums to {math.fsum(p)!r}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def B(self) -> int:
        return len(self.probs) - 1

    @property
    def los(self) -> float:
        return float(self.probs[0])

    @property
    def blockage(self) -> float:
        return float(math.fsum(self.probs[1:]))

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))

"""Path loss, per-blocker-count SNR laws, the SNR mixture and service probability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .blockage import blocker_count_pmf, distance_cdf, distance_support
from .config import RadioConfig, ScenarioConfig
from .stats import GaussianDist, GaussianMixture, mixture_ccdf


def los_pathloss_mean(d_tr: float, carrier_ghz: float) -> float:
    """Deterministic LoS path loss 32.4 + 20 log10(d) + 20 log10(f_GHz) in dB."""
    if not d_tr > 0 or not carrier_ghz > 0:
        raise ValueError("distance and carrier frequency must be > 0")
    return 32.4 + 20 * math.log10(d_tr) + 20 * math.log10(carrier_ghz)


def conditional_snr_dist(d_tr: float, k: int, radio: RadioConfig) -> GaussianDist:
    """SNR law with k blockers: shadowing and blockage loss add in dB."""
    if k < 0:
        raise ValueError("k must be >= 0")
    prof = radio.profile
    mean = radio.budget - (los_pathloss_mean(d_tr, radio.carrier_ghz) + prof.mu(k))
    return GaussianDist(mean, math.hypot(radio.sigma_shadow, prof.sigma(k)))


def snr_mixture_conditional(d_tr: float, radio: RadioConfig, scenario: ScenarioConfig) -> GaussianMixture:
    pmf = blocker_count_pmf(d_tr, scenario, radio.carrier_ghz)
    comps = [(w, conditional_snr_dist(d_tr, k, radio)) for k, w in enumerate(pmf.probs)]
    if len(comps) > 1 and all(w == 0 for w, _ in comps[1:]):
        comps = comps[:1]
    return GaussianMixture(tuple(comps))


def service_probability(
    d_tr: float, gamma_th: float, radio: RadioConfig, scenario: ScenarioConfig
) -> float:
    """P(SNR >= gamma_th) at distance d_tr."""
    return mixture_ccdf(snr_mixture_conditional(d_tr, radio, scenario), gamma_th)


@dataclass(frozen=True)
class SnrDensity:
    """Tabulated SNR density on an evenly spaced grid (dB, 1/dB)."""

    snr: np.ndarray
    density: np.ndarray
    cdf: np.ndarray

    def total(self) -> float:
        return float(trapezoid(self.density, self.snr))

    def mean(self) -> float:
        return float(trapezoid(self.snr * self.density, self.snr))

    def cdf_at(self, x):
        return np.interp(x, self.snr, self.cdf, left=0.0, right=1.0)


def default_distance_grid(scenario: ScenarioConfig, points: int = 512) -> np.ndarray:
    """Cell edges spanning the whole distance support.

    Uniform cells, except that the first one is split geometrically down to
    1e-6 of its width: path loss changes by tens of dB inside it.
    """
    lo, hi = distance_support(scenario)
    edges = np.linspace(lo, hi, points + 1)
    if lo == 0:
        inner = np.geomspace(edges[1] * 1e-6, edges[1], 40, endpoint=False)
        edges = np.concatenate(([0.0], inner, edges[1:]))
    return edges


def unconditional_snr_dist(
    radio: RadioConfig,
    scenario: ScenarioConfig,
    d_grid=None,
    snr_points: int = 512,
    snr_grid=None,
) -> SnrDensity:
    """SNR density with the Tx-Rx distance marginalised out.

    ``d_grid`` holds increasing cell edges over the distance support. Each
    cell contributes the conditional mixture at its midpoint, weighted by the
    exact probability mass of the cell (distance-CDF difference); this keeps
    the integrable singularities of the distance density at d = nW harmless.
    The SNR axis spans five standard deviations past the extreme component
    means unless ``snr_grid`` is given.
    """
    edges = default_distance_grid(scenario) if d_grid is None else np.asarray(d_grid, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("distance grid needs at least two edges")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("distance grid must be strictly increasing")
    mids = 0.5 * (edges[:-1] + edges[1:])
    masses = np.diff(distance_cdf(edges, scenario))
    keep = (masses > 0) & (mids > 0)
    mids, masses = mids[keep], masses[keep]
    masses = masses / masses.sum()

    mixtures = [snr_mixture_conditional(d, radio, scenario) for d in mids]
    if snr_grid is None:
        lo = min(float(np.min(m.means - 5 * m.stds)) for m in mixtures)
        hi = max(float(np.max(m.means + 5 * m.stds)) for m in mixtures)
        snr = np.linspace(lo, hi, snr_points)
    else:
        snr = np.asarray(snr_grid, dtype=float)
    density = np.zeros_like(snr)
    cdf = np.zeros_like(snr)
    for mass, mix in zip(masses, mixtures):
        density += mass * mix.pdf(snr)
        cdf += mass * mix.cdf(snr)
    return SnrDensity(snr, density, cdf)

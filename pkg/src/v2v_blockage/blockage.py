"""Analytical blocker-count model for a V2V link on a multi-lane highway.

Vehicles on each lane form a linear point process of density ``rho``. The
road between Tx and Rx is cut into occupancy slots; a slot blocks the link
when it holds a vehicle whose height pierces the 0.6-Fresnel clearance.
Same-lane links see N_s slots of length l_v + d_s; links spanning n lanes
see two endpoint-lane slots of length d_b and n - 1 intermediate slots of
length d_c. Slot outcomes are independent, so counts are Poisson binomial.
"""

from __future__ import annotations

import math

import numpy as np

from . import geometry
from .config import Occupancy, Placement, ScenarioConfig
from .stats import BlockerCountDistribution, GaussianDist, gaussian_q, poisson_binomial_pmf


def endpoint_height(scenario: ScenarioConfig) -> GaussianDist:
    """Antenna height law for Tx and Rx under the scenario's placement."""
    if scenario.placement is Placement.BUMPER:
        return GaussianDist(scenario.bumper_height, 0.0)
    dims = scenario.dims
    return GaussianDist(dims.height_mean, dims.height_std)


def blocker_height(scenario: ScenarioConfig) -> GaussianDist:
    dims = scenario.dims
    return GaussianDist(dims.blocker_height_mean, dims.blocker_height_std)


def single_blocker_blockage_prob(clearance: GaussianDist, blocker: GaussianDist) -> float:
    """P(h_b - h_clear > 0) for independent Gaussian heights."""
    mu_eff = blocker.mean - clearance.mean
    sigma_eff = math.hypot(blocker.std, clearance.std)
    if sigma_eff == 0:
        return 1.0 if mu_eff > 0 else 0.0
    return gaussian_q(-mu_eff / sigma_eff)


def occupancy_prob(load: float, occupancy: Occupancy = Occupancy.SINGLE) -> float:
    """Probability that a slot with expected vehicle count ``load`` is occupied."""
    if load < 0:
        raise ValueError("slot load must be >= 0")
    if Occupancy(occupancy) is Occupancy.AT_LEAST_ONE:
        return -math.expm1(-load)
    return load * math.exp(-load)


def slot_occupied_blockage_prob(
    slot_len: float,
    rho: float,
    clearance: GaussianDist,
    blocker: GaussianDist,
    occupancy: Occupancy = Occupancy.SINGLE,
) -> float:
    if not slot_len > 0:
        raise ValueError("slot length must be > 0")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    return single_blocker_blockage_prob(clearance, blocker) * occupancy_prob(rho * slot_len, occupancy)


def _clearance_at(d_tr: float, d_tb: float, n: int, scenario: ScenarioConfig, carrier_ghz: float):
    end = endpoint_height(scenario)
    return geometry.clearance_height_dist(
        geometry.LinkGeometry(d_tr, d_tb, n),
        end,
        end,
        carrier_ghz,
        neglect_fresnel=scenario.neglect_fresnel,
        exact_var=scenario.exact_clearance_var,
    )


def same_lane_slot_probs(d_tr: float, scenario: ScenarioConfig, carrier_ghz: float) -> np.ndarray:
    """P_a for each same-lane slot, Fresnel clearance taken at the slot midpoint."""
    dims = scenario.dims
    d_a = geometry.slot_length_same_lane(dims)
    blocker = blocker_height(scenario)
    return np.array(
        [
            slot_occupied_blockage_prob(
                d_a, scenario.rho, _clearance_at(d_tr, min(pos, d_tr), 0, scenario, carrier_ghz),
                blocker, scenario.occupancy,
            )
            for pos in geometry.same_lane_slot_positions(d_tr, dims)
        ]
    )


def cross_lane_slot_probs(
    d_tr: float, n: int, scenario: ScenarioConfig, carrier_ghz: float
) -> np.ndarray:
    """[P_b (Tx lane), P_c x (n - 1), P_b (Rx lane)] for lane offset n."""
    dims = scenario.dims
    d_b, d_c = geometry.slot_lengths_cross_lane(d_tr, n, scenario.lane_width, dims)
    positions = geometry.cross_lane_slot_positions(d_tr, n, scenario.lane_width, dims)
    sizes = [d_b, *([d_c] * (n - 1)), d_b]
    blocker = blocker_height(scenario)
    return np.array(
        [
            slot_occupied_blockage_prob(
                size, scenario.rho, _clearance_at(d_tr, pos, n, scenario, carrier_ghz),
                blocker, scenario.occupancy,
            )
            for size, pos in zip(sizes, positions)
        ]
    )


def same_lane_blocker_pmf(
    d_tr: float, scenario: ScenarioConfig, carrier_ghz: float
) -> BlockerCountDistribution:
    """Blocker-count law given Tx and Rx share a lane (k = 0..N_s)."""
    if not d_tr > 0:
        raise ValueError("d_tr must be > 0")
    return BlockerCountDistribution(poisson_binomial_pmf(same_lane_slot_probs(d_tr, scenario, carrier_ghz)))


def lane_offset_prob(n: int, lanes: int) -> float:
    """P(|lane_t - lane_r| = n) for endpoints on independent uniform lanes."""
    if lanes < 1:
        raise ValueError("lanes must be >= 1")
    if not 0 <= n <= lanes - 1:
        raise ValueError(f"lane offset {n} outside 0..{lanes - 1}")
    if n == 0:
        return 1.0 / lanes
    return 2.0 * (lanes - n) / lanes**2


def different_lane_blocker_pmf(d_tr: float, scenario: ScenarioConfig, carrier_ghz: float) -> np.ndarray:
    """Joint P(different lanes, k blockers) for k = 0..M.

    Sub-normalised: the entries sum to (M - 1)/M. Offsets whose lateral
    distance is not below d_tr have no slot geometry and put their whole
    weight on k = 0.
    """
    if not d_tr > 0:
        raise ValueError("d_tr must be > 0")
    M = scenario.lanes
    out = np.zeros(M + 1)
    for n in range(1, M):
        weight = lane_offset_prob(n, M)
        if d_tr <= n * scenario.lane_width:
            out[0] += weight
            continue
        pmf = poisson_binomial_pmf(cross_lane_slot_probs(d_tr, n, scenario, carrier_ghz))
        out[: len(pmf)] += weight * pmf
    return out


def blocker_count_pmf(d_tr: float, scenario: ScenarioConfig, carrier_ghz: float) -> BlockerCountDistribution:
    """P(k blockers | d_tr) for k = 0..max(N_s, M), lane placement marginalised."""
    M = scenario.lanes
    same = same_lane_blocker_pmf(d_tr, scenario, carrier_ghz).probs
    diff = different_lane_blocker_pmf(d_tr, scenario, carrier_ghz)
    B = max(len(same) - 1, M)
    probs = np.zeros(B + 1)
    probs[: len(same)] += same / M
    probs[: len(diff)] += diff
    probs[0] = 0.0
    probs[0] = max(0.0, 1.0 - math.fsum(probs))
    return BlockerCountDistribution(probs)


def expected_blockers(d_tr: float, scenario: ScenarioConfig, carrier_ghz: float) -> float:
    return blocker_count_pmf(d_tr, scenario, carrier_ghz).mean()


def _tri_cdf(u, D):
    u = np.clip(u, 0.0, D)
    return (2 * D * u - u * u) / D**2


def distance_pdf(d, scenario: ScenarioConfig):
    """Density of the Tx-Rx distance for uniform positions on [0, D] x lanes.

    Mixture over lane offsets n of sqrt(dx^2 + (nW)^2), where dx = |x_r - x_t|
    has the triangular density 2(D - u)/D^2.
    """
    d = np.asarray(d, dtype=float)
    D = scenario.length
    total = np.zeros_like(d)
    for n in range(scenario.lanes):
        w = lane_offset_prob(n, scenario.lanes)
        a = n * scenario.lane_width
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = np.sqrt(np.maximum(d * d - a * a, 0.0))
            if n == 0:
                dens = np.where((d >= 0) & (d <= D), 2 * (D - d) / D**2, 0.0)
            else:
                inside = (d > a) & (dx <= D)
                dens = np.where(inside, 2 * (D - dx) / D**2 * d / np.where(dx > 0, dx, 1.0), 0.0)
        total = total + w * dens
    return float(total) if total.ndim == 0 else total


def distance_cdf(d, scenario: ScenarioConfig):
    d = np.asarray(d, dtype=float)
    D = scenario.length
    total = np.zeros_like(d)
    for n in range(scenario.lanes):
        a = n * scenario.lane_width
        dx = np.sqrt(np.maximum(d * d - a * a, 0.0))
        total = total + lane_offset_prob(n, scenario.lanes) * np.where(d >= a, _tri_cdf(dx, D), 0.0)
    return float(total) if total.ndim == 0 else total


def distance_support(scenario: ScenarioConfig) -> tuple[float, float]:
    a = (scenario.lanes - 1) * scenario.lane_width
    return 0.0, math.hypot(scenario.length, a)

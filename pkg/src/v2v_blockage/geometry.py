"""Fresnel clearance and occupancy-slot geometry for a straight multi-lane road."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import VehicleDims
from .stats import GaussianDist

SPEED_OF_LIGHT = 299_792_458.0
FRESNEL_CLEARANCE = 0.6  # fraction of the first-zone radius that must stay clear


def wavelength(carrier_ghz: float) -> float:
    if not carrier_ghz > 0:
        raise ValueError("carrier frequency must be > 0")
    return SPEED_OF_LIGHT / (carrier_ghz * 1e9)


def fresnel_radius(d_tb: float, d_br: float, carrier_ghz: float) -> float:
    """First Fresnel zone radius at a point d_tb from Tx and d_br from Rx."""
    if d_tb < 0 or d_br < 0:
        raise ValueError("distances must be >= 0")
    total = d_tb + d_br
    if total <= 0:
        raise ValueError("zero link length has no Fresnel zone")
    return math.sqrt(wavelength(carrier_ghz) * d_tb * d_br / total)


@dataclass(frozen=True)
class LinkGeometry:
    """Blocker position along a Tx-Rx link.

    ``d_tb`` is measured from Tx along the line of sight; ``lane_offset`` is
    the number of lanes between the two endpoints.
    """

    d_tr: float
    d_tb: float
    lane_offset: int = 0

    def __post_init__(self):
        if not self.d_tr > 0:
            raise ValueError("d_tr must be > 0")
        if not 0 <= self.d_tb <= self.d_tr:
            raise ValueError(f"d_tb={self.d_tb} outside [0, {self.d_tr}]")
        if self.lane_offset < 0:
            raise ValueError("lane_offset must be >= 0")

    @property
    def d_br(self) -> float:
        return self.d_tr - self.d_tb


def clearance_height_dist(
    g: LinkGeometry,
    tx_height: GaussianDist,
    rx_height: GaussianDist,
    carrier_ghz: float,
    neglect_fresnel: bool = False,
    exact_var: bool = False,
) -> GaussianDist:
    """Law of the 0.6-Fresnel clearance height above the road at the blocker.

    The mean interpolates the endpoint antenna heights and subtracts 0.6 r.
    By default the spread is the convex combination of the endpoint stds,
    which is sigma_v whenever both endpoints share the vehicle height law
    (independent endpoint heights would give a smaller spread; pass
    ``exact_var=True`` for that).
    """
    w_r = g.d_tb / g.d_tr
    w_t = g.d_br / g.d_tr
    mean = w_r * rx_height.mean + w_t * tx_height.mean
    if not neglect_fresnel:
        mean -= FRESNEL_CLEARANCE * fresnel_radius(g.d_tb, g.d_br, carrier_ghz)
    if exact_var:
        std = math.hypot(w_r * rx_height.std, w_t * tx_height.std)
    else:
        std = w_r * rx_height.std + w_t * tx_height.std
    return GaussianDist(mean, std)


def slot_length_same_lane(dims: VehicleDims) -> float:
    return dims.length + dims.safety_gap


def slot_count(d_tr: float, dims: VehicleDims) -> int:
    """Maximum number of same-lane blockers, floor((d_tr - l_v) / d_a), >= 0."""
    if not d_tr > 0:
        raise ValueError("d_tr must be > 0")
    d_eff = d_tr - dims.length
    if d_eff <= 0:
        return 0
    # guard against 45/7.5 landing a hair under an integer
    return int(math.floor(d_eff / slot_length_same_lane(dims) + 1e-12))


def same_lane_slot_positions(d_tr: float, dims: VehicleDims) -> list[float]:
    """Distance from Tx to the midpoint of each same-lane slot."""
    d_a = slot_length_same_lane(dims)
    return [dims.length / 2 + (i + 0.5) * d_a for i in range(slot_count(d_tr, dims))]


def slot_lengths_cross_lane(
    d_tr: float, n: int, lane_width: float, dims: VehicleDims
) -> tuple[float, float]:
    """(d_b, d_c): blocking window on an endpoint lane and on an intermediate lane."""
    if n < 1:
        raise ValueError("cross-lane slots need a lane offset n >= 1")
    dy = n * lane_width
    if d_tr <= dy:
        raise ValueError(f"d_tr={d_tr} does not exceed the lateral offset {dy}")
    run = math.sqrt(d_tr * d_tr - dy * dy)
    d_b = dims.width * run / (2 * dy)
    d_c = dims.width * run / dy + dims.length
    return d_b, d_c


def cross_lane_slot_positions(
    d_tr: float, n: int, lane_width: float, dims: VehicleDims
) -> list[float]:
    """Distance from Tx (along the LoS) of each cross-lane slot, Tx lane first.

    Intermediate lanes use the point where the LoS crosses the lane
    centreline. The two endpoint lanes use the middle of their blocking
    window, since their centreline crossing is the antenna itself.
    """
    d_b, _ = slot_lengths_cross_lane(d_tr, n, lane_width, dims)
    run = math.sqrt(d_tr * d_tr - (n * lane_width) ** 2)
    edge = min(0.5 * d_b * d_tr / run, 0.5 * d_tr)
    inner = [d_tr * j / n for j in range(1, n)]
    return [edge, *inner, d_tr - edge]

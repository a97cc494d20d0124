"""Scenario and radio parameter sets.

Defaults reproduce the highway parameter table (M = 3 lanes, D = 200 m,
5 m x 1.8 m vehicles with N(1.5, 0.08^2) heights, 2.5 m safety gap,
0 dBm / 10 dB / 10 dB / -85 dBm radio). Values the table leaves open
(lane width, carrier, shadowing, bumper height, blockage attenuation) carry
documented defaults and are listed in ``UNTABULATED_DEFAULTS``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum


class Placement(str, Enum):
    ROOFTOP = "rooftop"
    BUMPER = "bumper"


class Occupancy(str, Enum):
    """How a slot of expected load Gamma counts as occupied."""

    SINGLE = "single"  # exactly one arrival: Gamma * exp(-Gamma)
    AT_LEAST_ONE = "at_least_one"  # 1 - exp(-Gamma)


@dataclass(frozen=True)
class VehicleDims:
    length: float = 5.0
    width: float = 1.8
    height_mean: float = 1.5
    height_std: float = 0.08
    blocker_height_mean: float = 1.5
    blocker_height_std: float = 0.08
    safety_gap: float = 2.5

    def __post_init__(self):
        for name in ("length", "width", "height_mean", "blocker_height_mean", "safety_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"dims.{name} must be > 0")
        for name in ("height_std", "blocker_height_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"dims.{name} must be >= 0")

    @property
    def slot_length(self) -> float:
        """Same-lane occupancy slot d_a = l_v + d_s."""
        return self.length + self.safety_gap


@dataclass(frozen=True)
class ScenarioConfig:
    """Highway geometry, traffic and antenna placement.

    ``rho`` is the per-lane linear density in vehicles per metre.
    The last three fields select model variants: how a slot counts as
    occupied, whether the Fresnel term is dropped from the clearance, and
    whether the clearance spread uses the exact independent-heights form.
    """

    lanes: int = 3
    lane_width: float = 4.0
    length: float = 200.0
    rho: float = 0.03
    dims: VehicleDims = field(default_factory=VehicleDims)
    placement: Placement = Placement.ROOFTOP
    bumper_height: float = 0.5
    occupancy: Occupancy = Occupancy.AT_LEAST_ONE
    neglect_fresnel: bool = False
    exact_clearance_var: bool = False

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "occupancy", Occupancy(self.occupancy))
        if int(self.lanes) != self.lanes or self.lanes < 1:
            raise ValueError("lanes must be an integer >= 1")
        if not self.length > 0:
            raise ValueError("length must be > 0")
        if not self.lane_width > 0:
            raise ValueError("lane_width must be > 0")
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError("rho must be finite and >= 0")
        if not self.bumper_height > 0:
            raise ValueError("bumper_height must be > 0")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class BlockageAttenuationProfile:
    """Per-blocker-count excess loss A(k) ~ N(mu(k), sigma(k)^2) in dB.

    ``mu_table``/``sigma_table`` give explicit values for k = 1, 2, ...;
    beyond the table, mu grows by ``increment`` per extra blocker up to ``cap``
    and sigma repeats ``sigma_extra``. k = 0 is always (0, 0).
    """

    base: float = 15.0
    increment: float = 6.0
    cap: float = 40.0
    sigma_extra: float = 4.5
    mu_table: tuple[float, ...] = ()
    sigma_table: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mu_table", tuple(float(v) for v in self.mu_table))
        object.__setattr__(self, "sigma_table", tuple(float(v) for v in self.sigma_table))
        if len(self.sigma_table) > len(self.mu_table):
            raise ValueError("sigma_table longer than mu_table")
        if self.increment < 0 or self.sigma_extra < 0:
            raise ValueError("increment and sigma_extra must be >= 0")
        if any(s < 0 for s in self.sigma_table):
            raise ValueError("sigma_table entries must be >= 0")
        mus = [0.0, *self.mu_table, self.mu(len(self.mu_table) + 1)]
        if any(b < a for a, b in zip(mus, mus[1:])):
            raise ValueError("blockage attenuation mu(k) must be non-decreasing")

    def mu(self, k: int) -> float:
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0:
            return 0.0
        if k <= len(self.mu_table):
            return self.mu_table[k - 1]
        n = len(self.mu_table)
        start = self.mu_table[-1] + self.increment if n else self.base
        return min(start + self.increment * (k - n - 1), max(self.cap, start))

    def sigma(self, k: int) -> float:
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0:
            return 0.0
        if k <= len(self.sigma_table):
            return self.sigma_table[k - 1]
        return self.sigma_extra


@dataclass(frozen=True)
class RadioConfig:
    tx_power: float = 0.0  # dBm
    tx_gain: float = 10.0  # dB
    rx_gain: float = 10.0  # dB
    noise_power: float = -85.0  # dBm
    carrier_ghz: float = 28.0
    sigma_shadow: float = 3.0  # dB
    gamma_th: float = 0.0  # dB
    profile: BlockageAttenuationProfile = field(default_factory=BlockageAttenuationProfile)

    def __post_init__(self):
        if not self.carrier_ghz > 0:
            raise ValueError("carrier_ghz must be > 0")
        if self.sigma_shadow < 0:
            raise ValueError("sigma_shadow must be >= 0")

    @property
    def budget(self) -> float:
        """P_t + G_t + G_r - P_n in dB."""
        return self.tx_power + self.tx_gain + self.rx_gain - self.noise_power

    def with_(self, **changes) -> "RadioConfig":
        return replace(self, **changes)


# (section, key) pairs whose defaults are not in the reference parameter set
UNTABULATED_DEFAULTS = (
    ("scenario", "lane_width"),
    ("scenario", "rho"),
    ("scenario", "placement"),
    ("scenario", "bumper_height"),
    ("scenario", "occupancy"),
    ("scenario", "neglect_fresnel"),
    ("scenario", "exact_clearance_var"),
    ("radio", "carrier_ghz"),
    ("radio", "sigma_shadow"),
    ("radio", "gamma_th"),
    ("radio", "profile"),
)


def field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]

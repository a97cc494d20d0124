"""Vehicle-induced LoS blockage for mmWave/sub-THz V2V links on multi-lane highways."""

from .blockage import (
    blocker_count_pmf,
    different_lane_blocker_pmf,
    distance_cdf,
    distance_pdf,
    expected_blockers,
    lane_offset_prob,
    same_lane_blocker_pmf,
    single_blocker_blockage_prob,
    slot_occupied_blockage_prob,
)
from .config import (
    BlockageAttenuationProfile,
    Occupancy,
    Placement,
    RadioConfig,
    ScenarioConfig,
    VehicleDims,
)
from .geometry import (
    LinkGeometry,
    clearance_height_dist,
    fresnel_radius,
    slot_count,
    slot_length_same_lane,
    slot_lengths_cross_lane,
)
from .link_budget import (
    conditional_snr_dist,
    los_pathloss_mean,
    service_probability,
    snr_mixture_conditional,
    unconditional_snr_dist,
)
from .stats import (
    BlockerCountDistribution,
    GaussianDist,
    GaussianMixture,
    gaussian_q,
    mixture_ccdf,
    poisson_binomial_pmf,
)

__version__ = "0.1.0"

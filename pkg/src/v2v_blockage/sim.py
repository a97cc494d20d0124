"""Monte Carlo traffic simulator used as an independent oracle.

Each lane carries a stationary hardcore renewal process: consecutive vehicle
centres are l_v + d_s apart plus an exponential gap whose rate makes the mean
density equal ``rho``. Tx and Rx are inserted as extra vehicles (traffic that
would violate the safety gap around them is removed) and blockers are found
by exact segment/footprint intersection with sampled heights. No slot
discretisation or analytical blockage probability is used here.

Randomness is keyed by (master_seed, grid point, chunk index) so any worker
count reproduces the sequential run bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .config import Placement, RadioConfig, ScenarioConfig
from .geometry import FRESNEL_CLEARANCE, wavelength
from .link_budget import conditional_snr_dist

CHUNK = 512
_CLEARANCE_SAMPLES = np.linspace(0.0, 1.0, 9)

RECORD_DTYPE = np.dtype(
    [("d_tr", "f8"), ("lane_offset", "i4"), ("k", "i4"), ("snr_db", "f8"), ("blocked", "?")]
)


class ConfigurationError(ValueError):
    pass


class LaneRule(str, Enum):
    RANDOM = "random"
    SAME = "same-lane"
    NEIGHBOR = "neighbor-lane"
    DIFFERENT = "different-lane"


class Experiment(str, Enum):
    BLOCKAGE_VS_DISTANCE = "blockage_vs_distance"
    SNR_HIST = "snr_hist"
    SERVICE_VS_DENSITY = "service_vs_density"
    SERVICE_VS_THRESHOLD = "service_vs_threshold"
    DISTANCE_HIST = "distance_hist"


@dataclass
class VehicleSnapshot:
    lane: np.ndarray
    x: np.ndarray
    height: np.ndarray
    scenario: ScenarioConfig
    seed: int | None = None

    def __len__(self):
        return len(self.x)

    def add(self, lane: int, x: float, height: float) -> int:
        """Append one vehicle and return its index."""
        self.lane = np.append(self.lane, lane)
        self.x = np.append(self.x, x)
        self.height = np.append(self.height, height)
        return len(self.x) - 1


def hardcore_rate(scenario: ScenarioConfig) -> float:
    """Exponential gap rate giving mean density rho with the mandatory spacing."""
    h = scenario.dims.slot_length
    rho = scenario.rho
    if rho * h > 1:
        raise ConfigurationError(
            f"rho={rho} veh/m is unreachable with {h} m minimum spacing (max {1 / h:.6g})"
        )
    if rho * h == 1:
        return math.inf
    return rho / (1 - rho * h)


def _lane_positions(rng: np.random.Generator, scenario: ScenarioConfig, lo: float, hi: float) -> np.ndarray:
    """Stationary hardcore renewal process restricted to [lo, hi]."""
    rho = scenario.rho
    if rho == 0 or hi <= lo:
        return np.empty(0)
    h = scenario.dims.slot_length
    rate = hardcore_rate(scenario)
    # equilibrium residual: uniform over the hard part w.p. rho*h, else h + Exp(rate)
    if rng.random() < rho * h:
        first = rng.random() * h
    else:
        first = h + (rng.exponential(1 / rate) if math.isfinite(rate) else 0.0)
    pos = [lo + first]
    expected = int((hi - lo) * rho) + 8
    while pos[-1] <= hi:
        gaps = h + (rng.exponential(1 / rate, expected) if math.isfinite(rate) else np.zeros(expected))
        pos.extend(pos[-1] + np.cumsum(gaps))
    arr = np.asarray(pos)
    return arr[arr <= hi]


def _heights(rng: np.random.Generator, scenario: ScenarioConfig, n: int, blockers: bool = True) -> np.ndarray:
    """Heights from the blocker law (or the Tx/Rx vehicle law), truncated at 0."""
    dims = scenario.dims
    mean, std = (
        (dims.blocker_height_mean, dims.blocker_height_std) if blockers else (dims.height_mean, dims.height_std)
    )
    h = rng.normal(mean, std, n)
    bad = h <= 0
    while bad.any():
        h[bad] = rng.normal(mean, std, int(bad.sum()))
        bad = h <= 0
    return h


def generate_snapshot(scenario: ScenarioConfig, seed: int) -> VehicleSnapshot:
    """Vehicles on every lane of [0, D]; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    return _snapshot(rng, scenario, 0.0, scenario.length, range(scenario.lanes), seed)


def _snapshot(rng, scenario, lo, hi, lanes, seed=None) -> VehicleSnapshot:
    hardcore_rate(scenario)
    xs, ls = [], []
    for lane in lanes:
        p = _lane_positions(rng, scenario, lo, hi)
        p = p[(p >= 0) & (p <= scenario.length)]
        xs.append(p)
        ls.append(np.full(len(p), lane, dtype=int))
    x = np.concatenate(xs) if xs else np.empty(0)
    lane = np.concatenate(ls) if ls else np.empty(0, dtype=int)
    return VehicleSnapshot(lane, x, _heights(rng, scenario, len(x)), scenario, seed)


def _antenna_height(scenario: ScenarioConfig, vehicle_height: float) -> float:
    if scenario.placement is Placement.BUMPER:
        return scenario.bumper_height
    return vehicle_height


def count_blockers_geometric(snapshot: VehicleSnapshot, tx: int, rx: int, carrier_ghz: float) -> int:
    """Vehicles whose footprint crosses the Tx-Rx segment and pierce the clearance.

    Antennas sit at the vehicle centre. A vehicle blocks when its height
    exceeds the 0.6-Fresnel clearance height somewhere along the part of the
    segment that lies over its footprint.
    """
    if tx == rx:
        raise ValueError("tx and rx must be different vehicles")
    scen = snapshot.scenario
    W = scen.lane_width
    others = np.ones(len(snapshot), dtype=bool)
    others[[tx, rx]] = False
    return _count_blockers(
        scen,
        carrier_ghz,
        (snapshot.x[tx], snapshot.lane[tx] * W, _antenna_height(scen, snapshot.height[tx])),
        (snapshot.x[rx], snapshot.lane[rx] * W, _antenna_height(scen, snapshot.height[rx])),
        snapshot.x[others],
        snapshot.lane[others] * W,
        snapshot.height[others],
    )


def _count_blockers(scen, carrier_ghz, tx, rx, bx, by, bh) -> int:
    if bx.size == 0:
        return 0
    dims = scen.dims
    x0, y0, h_t = tx
    x1, y1, h_r = rx
    # Liang-Barsky clip of the segment against every footprint
    t_lo = np.zeros(bx.size)
    t_hi = np.ones(bx.size)
    for origin, delta, centre, half in (
        (x0, x1 - x0, bx, dims.length / 2),
        (y0, y1 - y0, by, dims.width / 2),
    ):
        if delta == 0:
            t_hi = np.where(np.abs(origin - centre) > half, -1.0, t_hi)
        else:
            ta = (centre - half - origin) / delta
            tb = (centre + half - origin) / delta
            t_lo = np.maximum(t_lo, np.minimum(ta, tb))
            t_hi = np.minimum(t_hi, np.maximum(ta, tb))
    hit = t_lo <= t_hi
    if not hit.any():
        return 0

    t = t_lo[hit, None] + (t_hi[hit] - t_lo[hit])[:, None] * _CLEARANCE_SAMPLES
    clear = h_t * (1 - t) + h_r * t
    if not scen.neglect_fresnel:
        d_tr = math.hypot(x1 - x0, y1 - y0)
        clear = clear - FRESNEL_CLEARANCE * np.sqrt(wavelength(carrier_ghz) * d_tr * t * (1 - t))
    return int(np.count_nonzero(bh[hit] > clear.min(axis=1)))


def sample_link_snr(k: int, d_tr: float, radio: RadioConfig, rng: np.random.Generator) -> float:
    dist = conditional_snr_dist(d_tr, k, radio)
    return dist.mean + dist.std * rng.standard_normal()


def _draw_lanes(rng, lanes: int, rule: LaneRule) -> tuple[int, int]:
    if rule is LaneRule.RANDOM:
        return int(rng.integers(lanes)), int(rng.integers(lanes))
    if rule is LaneRule.SAME:
        lane = int(rng.integers(lanes))
        return lane, lane
    if lanes < 2:
        raise ConfigurationError(f"{rule.value} placement needs at least two lanes")
    if rule is LaneRule.DIFFERENT:
        lt = int(rng.integers(lanes))
        lr = int(rng.integers(lanes - 1))
        return lt, lr + (lr >= lt)
    lane = int(rng.integers(lanes - 1))
    return (lane, lane + 1) if rng.random() < 0.5 else (lane + 1, lane)


def simulate_link(
    rng: np.random.Generator,
    scenario: ScenarioConfig,
    radio: RadioConfig,
    lanes: tuple[int, int],
    dx: float,
) -> tuple[int, float]:
    """One trial with Tx and Rx a longitudinal distance ``dx`` apart. Returns (k, d_tr)."""
    D = scenario.length
    dims = scenario.dims
    W = scenario.lane_width
    lane_t, lane_r = lanes
    x_t = rng.random() * (D - dx)
    x_r = x_t + dx
    lo, hi = max(0.0, x_t - dims.length), min(D, x_r + dims.length)
    h = dims.slot_length
    xs, ys = [], []
    # lanes outside [lane_t, lane_r] cannot reach the segment
    for lane in range(min(lanes), max(lanes) + 1):
        p = _lane_positions(rng, scenario, lo, hi)
        p = p[p >= 0]
        if lane == lane_t:
            p = p[np.abs(p - x_t) >= h]
        if lane == lane_r:
            p = p[np.abs(p - x_r) >= h]
        xs.append(p)
        ys.append(np.full(p.size, lane * W))
    bx = np.concatenate(xs)
    by = np.concatenate(ys)
    bh = _heights(rng, scenario, bx.size)
    ht, hr = _heights(rng, scenario, 2, blockers=False)
    tx = (x_t, lane_t * W, _antenna_height(scenario, ht))
    rx = (x_r, lane_r * W, _antenna_height(scenario, hr))
    k = _count_blockers(scenario, radio.carrier_ghz, tx, rx, bx, by, bh)
    return k, math.hypot(dx, (lane_r - lane_t) * W)


def _run_chunk(args) -> np.ndarray:
    scenario, radio, d_tr, rule, master_seed, point, chunk, n = args
    rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(point, chunk)))
    out = np.zeros(n, dtype=RECORD_DTYPE)
    W = scenario.lane_width
    for i in range(n):
        if d_tr is None:
            lt, lr, dx = random_pair(rng, scenario)
        else:
            lt, lr = _draw_lanes(rng, scenario.lanes, rule)
            dy = abs(lr - lt) * W
            dx = math.sqrt(max(d_tr * d_tr - dy * dy, 0.0))
        k, dist = simulate_link(rng, scenario, radio, (lt, lr), dx)
        out[i] = (dist, abs(lr - lt), k, sample_link_snr(k, dist, radio, rng), k > 0)
    return out


def random_pair(rng, scenario: ScenarioConfig) -> tuple[int, int, float]:
    """Uniform lanes, then uniform positions redrawn while same-lane boxes overlap.

    Lanes are fixed before the rejection loop so the same-lane fraction stays
    exactly 1/M. Returns (tx lane, rx lane, longitudinal separation).
    """
    D = scenario.length
    lt, lr = (int(v) for v in rng.integers(scenario.lanes, size=2))
    while True:
        xt, xr = rng.random(2) * D
        dx = abs(xr - xt)
        if lt == lr and dx < scenario.dims.length:
            continue
        return lt, lr, dx


def simulate_point(
    scenario: ScenarioConfig,
    radio: RadioConfig,
    d_tr: float | None,
    trials: int,
    master_seed: int,
    point: int = 0,
    rule: LaneRule = LaneRule.RANDOM,
    workers: int = 1,
) -> np.ndarray:
    """TrialRecords for one grid point (``d_tr=None`` draws random positions)."""
    rule = LaneRule(rule)
    hardcore_rate(scenario)
    if trials < 0:
        raise ConfigurationError("trials must be >= 0")
    if d_tr is not None:
        if not d_tr > 0:
            raise ConfigurationError("d_tr must be > 0")
        max_dy = {LaneRule.SAME: 0, LaneRule.NEIGHBOR: 1}.get(rule, 0) * scenario.lane_width
        if math.sqrt(max(d_tr**2 - max_dy**2, 0.0)) > scenario.length:
            raise ConfigurationError(f"d_tr={d_tr} does not fit on a {scenario.length} m road")
    jobs = [
        (scenario, radio, d_tr, rule, master_seed, point, c, min(CHUNK, trials - c * CHUNK))
        for c in range(math.ceil(trials / CHUNK))
    ]
    if not jobs:
        return np.zeros(0, dtype=RECORD_DTYPE)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    return np.concatenate(parts)


def wilson_half_width(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """(centre, half-width) of the Wilson score interval."""
    if n == 0:
        return math.nan, math.nan
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return centre, half


def mean_half_width(values: np.ndarray, z: float = 1.96) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    if n == 1:
        return float(values[0]), math.nan
    return float(values.mean()), z * float(values.std(ddof=1)) / math.sqrt(n)


@dataclass
class ExperimentResult:
    experiment: Experiment
    trials: int
    master_seed: int
    rows: list[dict] = field(default_factory=list)


def _summarise(records: np.ndarray, gamma_th: float) -> dict:
    n = len(records)
    blocked = int(records["blocked"].sum())
    served = int((records["snr_db"] >= gamma_th).sum())
    p_block = blocked / n if n else math.nan
    _, ci_block = wilson_half_width(blocked, n)
    p_serve = served / n if n else math.nan
    _, ci_serve = wilson_half_width(served, n)
    mean_k, ci_k = mean_half_width(records["k"].astype(float))
    hist = np.bincount(records["k"]) if n else np.zeros(1, dtype=int)
    return {
        "mc_blockage": p_block,
        "mc_blockage_ci": ci_block,
        "mc_mean_blockers": mean_k,
        "mc_mean_blockers_ci": ci_k,
        "mc_service": p_serve,
        "mc_service_ci": ci_serve,
        "k_hist": hist.tolist(),
        "trials": n,
    }


def run_experiment(
    scenario: ScenarioConfig,
    radio: RadioConfig,
    experiment: Experiment | str,
    trials: int,
    master_seed: int,
    distances: Sequence[float] = (50.0,),
    densities: Sequence[float] | None = None,
    thresholds: Sequence[float] | None = None,
    rule: LaneRule | str = LaneRule.RANDOM,
    workers: int = 1,
    snr_bins: int = 60,
) -> ExperimentResult:
    """Empirical curves over a sweep grid, each point from fresh snapshots."""
    experiment = Experiment(experiment)
    rule = LaneRule(rule)
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    densities = [scenario.rho] if densities is None else list(densities)
    thresholds = [radio.gamma_th] if thresholds is None else list(thresholds)
    for name, grid in (("distances", distances), ("densities", densities), ("thresholds", thresholds)):
        _check_grid(name, grid)
    result = ExperimentResult(experiment, trials, master_seed)

    if experiment is Experiment.DISTANCE_HIST:
        rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(0,)))
        d = sample_distances(scenario, trials, rng)
        edges = np.linspace(0.0, float(d.max()) if d.size else 1.0, 41)
        counts, _ = np.histogram(d, edges)
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            result.rows.append({"d_lo": lo, "d_hi": hi, "mc_density": c / (trials * (hi - lo))})
        return result

    point = 0
    for rho in densities:
        scen = scenario.with_(rho=rho)
        for d in distances:
            rec = simulate_point(scen, radio, d, trials, master_seed, point, rule, workers)
            point += 1
            if experiment is Experiment.SNR_HIST:
                edges = np.linspace(rec["snr_db"].min() - 1e-9, rec["snr_db"].max() + 1e-9, snr_bins + 1)
                counts, _ = np.histogram(rec["snr_db"], edges)
                for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                    result.rows.append(
                        {"rho": rho, "d_tr": d, "snr_lo": lo, "snr_hi": hi,
                         "mc_density": c / (trials * (hi - lo))}
                    )
                continue
            for th in thresholds:
                row = {"rho": rho, "d_tr": d, "gamma_th": th}
                row.update(_summarise(rec, th))
                result.rows.append(row)
    return result


def _check_grid(name, grid):
    g = list(grid)
    if not g:
        raise ConfigurationError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(g, g[1:])):
        raise ConfigurationError(f"{name} grid must be strictly increasing")


def sample_distances(scenario: ScenarioConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Tx-Rx distances for independent uniform positions on [0, D] and uniform lanes."""
    D = scenario.length
    x = rng.random((n, 2)) * D
    lanes = rng.integers(scenario.lanes, size=(n, 2))
    return np.hypot(x[:, 0] - x[:, 1], (lanes[:, 0] - lanes[:, 1]) * scenario.lane_width)

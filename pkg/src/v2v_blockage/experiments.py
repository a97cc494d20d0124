"""Analytic-vs-Monte-Carlo tables behind the CLI subcommands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .blockage import (
    blocker_count_pmf,
    cross_lane_slot_probs,
    different_lane_blocker_pmf,
    distance_cdf,
    distance_pdf,
    distance_support,
    lane_offset_prob,
    same_lane_blocker_pmf,
)
from .config import Placement
from .link_budget import conditional_snr_dist, snr_mixture_conditional
from .runconfig import RunConfig
from .sim import LaneRule, mean_half_width, sample_distances, simulate_point, wilson_half_width
from .stats import GaussianMixture, poisson_binomial_pmf

# tolerances used by ``validate``
PMF_TV_TOL = 0.05
SNR_KS_TOL = 0.03
NORMALIZATION_TOL = 1e-9
DISTANCE_PDF_TOL = 1e-6
SNR_CHECK_POINT = (50.0, 0.03)


@dataclass
class Table:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    failed: bool = False


def _conditioned(cfg: RunConfig, rho: float):
    return cfg.scenario.with_(rho=rho)


def _pmf_for_rule(d: float, scen, radio, rule: LaneRule) -> np.ndarray:
    """Blocker PMF under the lane-placement rule used by the simulator."""
    if rule is LaneRule.RANDOM:
        return blocker_count_pmf(d, scen, radio.carrier_ghz).probs
    if rule is LaneRule.SAME:
        return same_lane_blocker_pmf(d, scen, radio.carrier_ghz).probs
    if rule is LaneRule.DIFFERENT:
        dl = different_lane_blocker_pmf(d, scen, radio.carrier_ghz)
        return dl / dl.sum()
    if d <= scen.lane_width:
        return np.array([1.0])
    return poisson_binomial_pmf(cross_lane_slot_probs(d, 1, scen, radio.carrier_ghz))


def mixture_for_rule(d: float, scen, radio, rule: LaneRule) -> GaussianMixture:
    if rule is LaneRule.RANDOM:
        return snr_mixture_conditional(d, radio, scen)
    pmf = _pmf_for_rule(d, scen, radio, rule)
    return GaussianMixture(tuple((w, conditional_snr_dist(d, k, radio)) for k, w in enumerate(pmf)))


def distance_pdf_integral(scen) -> float:
    """Numerical integral of the distance density over its whole support."""
    lo, hi = distance_support(scen)
    # the density has integrable spikes at every lateral offset n*W
    offsets = [n * scen.lane_width for n in range(scen.lanes)]
    corners = sorted(set(offsets[1:]) | {math.hypot(scen.length, a) for a in offsets})
    corners = [c for c in corners if lo < c < hi]
    total, _ = integrate.quad(lambda x: distance_pdf(x, scen), lo, hi, points=corners or None, limit=500)
    return total


def total_variation(p, q) -> float:
    n = max(len(p), len(q))
    a = np.zeros(n)
    b = np.zeros(n)
    a[: len(p)] = p
    b[: len(q)] = q
    return 0.5 * float(np.abs(a - b).sum())


def _mc(cfg: RunConfig, scen, d, point):
    if cfg.trials == 0:
        return None
    return simulate_point(scen, cfg.radio, d, cfg.trials, cfg.seed, point, cfg.lane_rule, cfg.workers)


def blockage_table(cfg: RunConfig, quantity: str = "blockage") -> Table:
    """Blockage probability (or mean blocker count) against distance, per density."""
    table = Table(["rho", "d_tr", f"analytic_{quantity}", f"mc_{quantity}", "mc_ci_half_width", "trials"])
    point = 0
    for rho in cfg.densities:
        scen = _conditioned(cfg, rho)
        for d in cfg.distances:
            pmf = _pmf_for_rule(d, scen, cfg.radio, cfg.lane_rule)
            analytic = 1.0 - pmf[0] if quantity == "blockage" else float(np.dot(np.arange(len(pmf)), pmf))
            rec = _mc(cfg, scen, d, point)
            point += 1
            row = {"rho": rho, "d_tr": d, f"analytic_{quantity}": analytic,
                   f"mc_{quantity}": None, "mc_ci_half_width": None, "trials": cfg.trials}
            if rec is not None:
                if quantity == "blockage":
                    n_blocked = int(rec["blocked"].sum())
                    row[f"mc_{quantity}"] = n_blocked / len(rec)
                    row["mc_ci_half_width"] = wilson_half_width(n_blocked, len(rec))[1]
                else:
                    row[f"mc_{quantity}"], row["mc_ci_half_width"] = mean_half_width(rec["k"].astype(float))
            table.rows.append(row)
    return table


def service_table(cfg: RunConfig) -> Table:
    table = Table(["rho", "d_tr", "gamma_th", "analytic_service", "mc_service", "mc_ci_half_width", "trials"])
    point = 0
    for rho in cfg.densities:
        scen = _conditioned(cfg, rho)
        for d in cfg.distances:
            mix = mixture_for_rule(d, scen, cfg.radio, cfg.lane_rule)
            rec = _mc(cfg, scen, d, point)
            point += 1
            for th in cfg.thresholds:
                row = {"rho": rho, "d_tr": d, "gamma_th": th, "analytic_service": mix.ccdf(th),
                       "mc_service": None, "mc_ci_half_width": None, "trials": cfg.trials}
                if rec is not None:
                    served = int((rec["snr_db"] >= th).sum())
                    row["mc_service"] = served / len(rec)
                    row["mc_ci_half_width"] = wilson_half_width(served, len(rec))[1]
                table.rows.append(row)
    return table


def snr_table(cfg: RunConfig, bins: int = 60) -> Table:
    """Mixture components, mixture mean and density vs. MC histogram per grid point."""
    table = Table(["rho", "d_tr", "kind", "k", "weight", "mean_db", "std_db",
                   "snr_lo", "snr_hi", "analytic_density", "mc_density", "mc_mean_db", "trials"])
    point = 0
    for rho in cfg.densities:
        scen = _conditioned(cfg, rho)
        for d in cfg.distances:
            mix = mixture_for_rule(d, scen, cfg.radio, cfg.lane_rule)
            rec = _mc(cfg, scen, d, point)
            point += 1
            base = {"rho": rho, "d_tr": d, "trials": cfg.trials}
            for k, (w, comp) in enumerate(mix.components):
                table.rows.append({**base, "kind": "component", "k": k, "weight": w,
                                   "mean_db": comp.mean, "std_db": comp.std})
            table.rows.append({**base, "kind": "summary", "mean_db": mix.mean(),
                               "mc_mean_db": float(rec["snr_db"].mean()) if rec is not None else None})
            lo = float(np.min(mix.means - 4 * mix.stds))
            hi = float(np.max(mix.means + 4 * mix.stds))
            edges = np.linspace(lo, hi, bins + 1)
            counts = np.histogram(rec["snr_db"], edges)[0] if rec is not None else None
            cdf = mix.cdf(edges)
            for i in range(bins):
                width = edges[i + 1] - edges[i]
                table.rows.append({
                    **base, "kind": "density", "snr_lo": edges[i], "snr_hi": edges[i + 1],
                    # cell-averaged density, comparable with the histogram
                    "analytic_density": (cdf[i + 1] - cdf[i]) / width,
                    "mc_density": None if counts is None else counts[i] / (len(rec) * width),
                })
    return table


def distance_table(cfg: RunConfig, bins: int = 40) -> Table:
    scen = cfg.scenario
    table = Table(["d_lo", "d_hi", "analytic_pdf_mid", "analytic_density", "mc_density", "trials"])
    lo, hi = distance_support(scen)
    edges = np.linspace(lo, hi, bins + 1)
    cdf = distance_cdf(edges, scen)
    counts = None
    if cfg.trials:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
        counts = np.histogram(sample_distances(scen, cfg.trials, rng), edges)[0]
    for i in range(bins):
        width = edges[i + 1] - edges[i]
        table.rows.append({
            "d_lo": edges[i], "d_hi": edges[i + 1],
            "analytic_pdf_mid": distance_pdf(0.5 * (edges[i] + edges[i + 1]), scen),
            "analytic_density": (cdf[i + 1] - cdf[i]) / width,
            "mc_density": None if counts is None else counts[i] / (cfg.trials * width),
            "trials": cfg.trials,
        })
    return table


def validate_table(cfg: RunConfig) -> Table:
    """Analytic-vs-MC consistency checks; ``failed`` is set if any check fails."""
    table = Table(["check", "rho", "d_tr", "placement", "statistic", "tolerance", "passed"])

    def add(check, stat, tol, rho=None, d=None, placement=None):
        table.rows.append({"check": check, "rho": rho, "d_tr": d, "placement": placement,
                           "statistic": stat, "tolerance": tol, "passed": bool(stat <= tol)})

    scen0 = cfg.scenario
    # normalisation of the analytic objects
    worst = 0.0
    for rho in cfg.densities:
        for d in cfg.distances:
            worst = max(worst, abs(math.fsum(blocker_count_pmf(d, scen0.with_(rho=rho), cfg.radio.carrier_ghz).probs) - 1))
    add("blocker_pmf_sum", worst, NORMALIZATION_TOL)
    add("lane_offset_sum", abs(math.fsum(lane_offset_prob(n, scen0.lanes) for n in range(scen0.lanes)) - 1), 0.0)
    add("distance_pdf_integral", abs(distance_pdf_integral(scen0) - 1), DISTANCE_PDF_TOL)

    if cfg.trials == 0:
        table.failed = not all(r["passed"] for r in table.rows)
        return table

    point = 0
    for rho in cfg.densities:
        scen = scen0.with_(rho=rho)
        for d in cfg.distances:
            rec = simulate_point(scen, cfg.radio, d, cfg.trials, cfg.seed, point, cfg.lane_rule, cfg.workers)
            point += 1
            hist = np.bincount(rec["k"]) / len(rec)
            add("blocker_pmf_tv", total_variation(_pmf_for_rule(d, scen, cfg.radio, cfg.lane_rule), hist),
                PMF_TV_TOL, rho, d, scen.placement.value)
    d, rho = SNR_CHECK_POINT
    for placement in (Placement.ROOFTOP, Placement.BUMPER):
        scen = scen0.with_(rho=rho, placement=placement)
        rec = simulate_point(scen, cfg.radio, d, cfg.trials, cfg.seed, point, cfg.lane_rule, cfg.workers)
        point += 1
        mix = mixture_for_rule(d, scen, cfg.radio, cfg.lane_rule)
        add("snr_cdf_ks", float(stats.kstest(rec["snr_db"], mix.cdf).statistic), SNR_KS_TOL,
            rho, d, placement.value)
    table.failed = not all(r["passed"] for r in table.rows)
    return table


def build_table(cfg: RunConfig) -> Table:
    exp = cfg.experiment
    if exp == "blockage-prob":
        return blockage_table(cfg, "blockage")
    if exp == "avg-blockers":
        return blockage_table(cfg, "mean_blockers")
    if exp == "service-prob":
        return service_table(cfg)
    if exp == "snr-dist":
        return snr_table(cfg)
    if exp == "distance-pdf":
        return distance_table(cfg)
    if exp == "validate":
        return validate_table(cfg)
    raise ValueError(f"unknown experiment {exp!r}")

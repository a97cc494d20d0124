"""Acceptance criteria, one test and one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are repeated
in the terminal summary. Criterion 2 simulates 9 x 10^5 links and takes a few
minutes.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from v2v_blockage.blockage import blocker_count_pmf, lane_offset_prob
from v2v_blockage.cli import main
from v2v_blockage.config import BlockageAttenuationProfile, RadioConfig, ScenarioConfig
from v2v_blockage.experiments import distance_pdf_integral, total_variation
from v2v_blockage.geometry import fresnel_radius, slot_count, slot_lengths_cross_lane
from v2v_blockage.link_budget import los_pathloss_mean, service_probability, snr_mixture_conditional
from v2v_blockage.stats import mixture_ccdf, poisson_binomial_pmf

from .conftest import cached_sim, empirical_pmf, report
from .test_stats import enumerate_pmf

# every acceptance run pins the attenuation profile and shadowing explicitly
PINNED = RadioConfig(
    sigma_shadow=3.0,
    carrier_ghz=28.0,
    profile=BlockageAttenuationProfile(base=15.0, increment=6.0, cap=40.0, sigma_extra=4.5),
)
TABLE = ScenarioConfig(lanes=3)


def test_c1_blockage_endpoints():
    start = time.perf_counter()
    scen = TABLE.with_(placement="bumper")
    low = 1 - blocker_count_pmf(200, scen.with_(rho=0.01), 28).los
    high = 1 - blocker_count_pmf(200, scen.with_(rho=0.05), 28).los
    elapsed = time.perf_counter() - start
    ok = 0.40 <= low <= 0.60 and 0.80 <= high <= 0.97 and elapsed < 1
    report(1, ok, f"P_block(200 m): rho=0.01 -> {low:.3f} (want [0.40, 0.60]), "
                  f"rho=0.05 -> {high:.3f} (want [0.80, 0.97]), {elapsed * 1e3:.0f} ms")


@pytest.mark.slow
def test_c2_pmf_against_simulator():
    worst, details = 0.0, []
    for d, rho in itertools.product((50, 100, 200), (0.01, 0.03, 0.05)):
        scen = TABLE.with_(rho=rho)
        rec = cached_sim(scen, PINNED, float(d), 100_000, 2)
        tv = total_variation(blocker_count_pmf(d, scen, 28).probs, empirical_pmf(rec))
        worst = max(worst, tv)
        details.append(f"({d},{rho}):{tv:.3f}")
    report(2, worst <= 0.05, f"max TV {worst:.3f} (want <= 0.05) " + " ".join(details))


def test_c3_normalisation():
    configs = [ScenarioConfig(lanes=M, lane_width=W, length=D, rho=rho)
               for M, W, D, rho in itertools.islice(
                   itertools.product((1, 2, 3, 5, 8), (3.5, 4.0), (150.0, 200.0), (0.01, 0.05)), 0, 40, 2)]
    assert len(configs) == 20
    pmf_err = max(abs(math.fsum(blocker_count_pmf(d, s, 28).probs) - 1)
                  for s in configs for d in (10.0, 75.0, 190.0))
    lane_exact = all(math.fsum(lane_offset_prob(n, M) for n in range(M)) == 1.0 for M in range(1, 21))
    pdf_err = max(abs(distance_pdf_integral(s) - 1) for s in configs)
    ok = pmf_err <= 1e-9 and lane_exact and pdf_err <= 1e-6
    report(3, ok, f"pmf sum err {pmf_err:.1e}, lane-offset sums exact: {lane_exact}, "
                  f"distance pdf err {pdf_err:.1e}")


def test_c4_poisson_binomial_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        probs = rng.random(int(rng.integers(0, 13)))
        worst = max(worst, float(np.max(np.abs(poisson_binomial_pmf(probs) - enumerate_pmf(probs)))))
    report(4, worst <= 1e-12, f"max |DP - enumeration| over 200 vectors = {worst:.1e}")


def test_c5_bumper_penalty():
    ordered = all(
        snr_mixture_conditional(d, PINNED, TABLE.with_(rho=rho, lanes=M, placement="bumper")).mean()
        <= snr_mixture_conditional(d, PINNED, TABLE.with_(rho=rho, lanes=M)).mean()
        for d in (10, 25, 50, 100, 150, 200) for rho in (0.0, 0.01, 0.03, 0.05) for M in (1, 3, 4)
    )
    scen = TABLE.with_(rho=0.03)
    gap = (snr_mixture_conditional(25, PINNED, scen).mean()
           - snr_mixture_conditional(25, PINNED, scen.with_(placement="bumper")).mean())
    report(5, ordered and 2 <= gap <= 7, f"ordering holds on grid: {ordered}; "
                                         f"gap at (25 m, 0.03) = {gap:.2f} dB (want [2, 7])")


def test_c6_service_probability():
    gammas = np.linspace(-30, 30, 10)
    rhos = np.linspace(0.0, 0.05, 10)
    ds = np.linspace(10, 200, 10)
    sp = np.array([[[service_probability(d, g, PINNED, TABLE.with_(rho=r)) for d in ds] for r in rhos]
                   for g in gammas])
    rises = {name: float(np.diff(sp, axis=a).max()) for a, name in enumerate(("gamma_th", "rho", "d_tr"))}
    consistent = max(abs(service_probability(d, g, PINNED, TABLE.with_(rho=0.03))
                         - mixture_ccdf(snr_mixture_conditional(d, PINNED, TABLE.with_(rho=0.03)), g))
                     for d in ds for g in gammas)
    limit = service_probability(100, -math.inf, PINNED, TABLE)
    ok = max(rises.values()) <= 0 and consistent <= 1e-12 and limit == 1.0
    report(6, ok, "largest increase along " + ", ".join(f"{k} {v:.1e}" for k, v in rises.items())
           + f"; |P_S - ccdf| {consistent:.1e}; P_S(-inf) = {limit}")


@pytest.mark.slow
def test_c7_snr_fit():
    ks = {}
    for placement, seed in (("rooftop", 7), ("bumper", 8)):
        scen = TABLE.with_(rho=0.03, placement=placement)
        rec = cached_sim(scen, PINNED, 50.0, 100_000, seed)
        ks[placement] = stats.kstest(rec["snr_db"], snr_mixture_conditional(50, PINNED, scen).cdf).statistic
    report(7, max(ks.values()) <= 0.03,
           f"KS rooftop {ks['rooftop']:.3f}, bumper {ks['bumper']:.3f} (want <= 0.03)")


def test_c8_determinism(tmp_path):
    outputs = []
    for workers, attempt in itertools.product((1, 2), (0, 1)):
        out = tmp_path / f"validate-{workers}-{attempt}.csv"
        main(["validate", "--trials", "1100", "--dtr", "50,100", "--rho", "0.01,0.03",
              "--workers", str(workers), "--seed", "9", "--out", str(out)])
        outputs.append(out.read_bytes())
    same = all(o == outputs[0] for o in outputs)
    report(8, same and len(outputs[0]) > 0, f"4 validate runs (workers 1 and 2, twice each) byte-identical: {same}")


def test_c9_hand_values():
    checks = {
        "mu_LoS(100, 28)": (los_pathloss_mean(100, 28), 101.34, 0.01),
        "r(100, 100, 28)": (fresnel_radius(100, 100, 28), 0.732, 0.001),
        "d_b(50, 1, 4)": (slot_lengths_cross_lane(50, 1, 4.0, TABLE.dims)[0], 11.21, 0.01),
        "d_c(50, 1, 4)": (slot_lengths_cross_lane(50, 1, 4.0, TABLE.dims)[1], 27.43, 0.01),
        "N_s(50)": (slot_count(50, TABLE.dims), 6, 0),
    }
    bad = [k for k, (got, want, tol) in checks.items() if abs(got - want) > tol]
    report(9, not bad, ", ".join(f"{k} = {v[0]:.5g}" for k, v in checks.items()))

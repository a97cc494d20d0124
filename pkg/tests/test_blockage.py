import math

import numpy as np
import pytest
from scipy import integrate, stats

from v2v_blockage.blockage import (
    blocker_count_pmf,
    different_lane_blocker_pmf,
    distance_cdf,
    distance_pdf,
    expected_blockers,
    lane_offset_prob,
    occupancy_prob,
    same_lane_blocker_pmf,
    same_lane_slot_probs,
    single_blocker_blockage_prob,
    slot_occupied_blockage_prob,
)
from v2v_blockage.config import Occupancy, RadioConfig, ScenarioConfig
from v2v_blockage.experiments import total_variation
from v2v_blockage.sim import sample_distances
from v2v_blockage.stats import GaussianDist, poisson_binomial_pmf

from .conftest import cached_sim, empirical_pmf

F_C = 28.0
CERTAIN = (GaussianDist(-10.0, 0.0), GaussianDist(1.5, 0.0))
SLOT_CAP = (
    "slot model lets a slot hold at most one blocker and ignores the Tx/Rx safety-gap "
    "exclusion; the geometric oracle sees more, and more regular, blockers"
)


class TestSingleBlocker:
    def test_equal_means_half(self):
        assert single_blocker_blockage_prob(GaussianDist(1.2, 0.08), GaussianDist(1.2, 0.08)) == 0.5

    def test_bumper_link_almost_sure(self):
        p = single_blocker_blockage_prob(GaussianDist(0.5, 0.0), GaussianDist(1.5, 0.08))
        assert p == pytest.approx(1.0, abs=1e-9)

    def test_degenerate_no_blockage(self):
        assert single_blocker_blockage_prob(GaussianDist(1.6, 0.0), GaussianDist(1.5, 0.0)) == 0.0
        assert single_blocker_blockage_prob(GaussianDist(1.4, 0.0), GaussianDist(1.5, 0.0)) == 1.0


class TestSlotOccupancy:
    def test_empty_road(self):
        assert slot_occupied_blockage_prob(7.5, 0.0, *CERTAIN) == 0.0

    def test_single_arrival_peak(self):
        p = slot_occupied_blockage_prob(10.0, 0.1, *CERTAIN, occupancy=Occupancy.SINGLE)
        assert p == pytest.approx(0.3679, abs=1e-4)

    def test_single_arrival_table_slot(self):
        # 0.375 * exp(-0.375) = 0.25773
        p = slot_occupied_blockage_prob(7.5, 0.05, *CERTAIN, occupancy=Occupancy.SINGLE)
        assert p == pytest.approx(0.2578, abs=1e-4)

    def test_at_least_one_arrival(self):
        p = slot_occupied_blockage_prob(7.5, 0.05, *CERTAIN, occupancy=Occupancy.AT_LEAST_ONE)
        assert p == pytest.approx(1 - math.exp(-0.375), rel=1e-12)

    def test_at_least_one_dominates_single(self):
        for load in np.linspace(0, 5, 51):
            assert occupancy_prob(load, Occupancy.AT_LEAST_ONE) >= occupancy_prob(load, Occupancy.SINGLE)


class TestLaneOffset:
    def test_three_lanes(self):
        # direct count over the 9 ordered lane pairs: 3 same, 4 adjacent, 2 two apart
        assert [lane_offset_prob(n, 3) for n in range(3)] == pytest.approx([1 / 3, 4 / 9, 2 / 9])

    @pytest.mark.parametrize("M", range(1, 9))
    def test_sums_to_one(self, M):
        assert math.fsum(lane_offset_prob(n, M) for n in range(M)) == pytest.approx(1.0, abs=1e-15)

    def test_single_lane(self):
        assert lane_offset_prob(0, 1) == 1.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            lane_offset_prob(3, 3)


class TestSameLane:
    def test_empty_road_point_mass(self):
        pmf = same_lane_blocker_pmf(100, ScenarioConfig(rho=0.0), F_C)
        assert pmf.los == 1.0

    @pytest.mark.parametrize("d", [20, 50, 100, 200])
    def test_normalised(self, d):
        assert math.fsum(same_lane_blocker_pmf(d, ScenarioConfig(), F_C).probs) == pytest.approx(1, abs=1e-12)

    def test_short_link_has_no_slots(self):
        assert same_lane_blocker_pmf(5, ScenarioConfig(rho=0.05), F_C).probs.tolist() == [1.0]

    @pytest.mark.parametrize("occupancy", list(Occupancy))
    def test_equals_poisson_binomial_with_identical_slots(self, occupancy):
        scen = ScenarioConfig(rho=0.04, placement="bumper", occupancy=occupancy)
        probs = same_lane_slot_probs(120, scen, F_C)
        assert np.ptp(probs) == 0
        pmf = same_lane_blocker_pmf(120, scen, F_C).probs
        np.testing.assert_allclose(pmf, poisson_binomial_pmf([probs[0]] * len(probs)), atol=1e-15)
        np.testing.assert_allclose(pmf, stats.binom.pmf(np.arange(len(probs) + 1), len(probs), probs[0]), atol=1e-12)

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=SLOT_CAP)
    def test_matches_simulator(self):
        scen = ScenarioConfig(rho=0.05, placement="bumper")
        rec = cached_sim(scen, RadioConfig(), 50.0, 100_000, 11, "same-lane")
        assert total_variation(same_lane_blocker_pmf(50, scen, F_C).probs, empirical_pmf(rec)) <= 0.03


class TestDifferentLane:
    def test_two_lanes_only_adjacent_term(self):
        scen = ScenarioConfig(lanes=2, rho=0.03)
        out = different_lane_blocker_pmf(60, scen, F_C)
        assert len(out) == 3
        assert math.fsum(out) == pytest.approx(0.5, abs=1e-12)

    def test_empty_road(self):
        out = different_lane_blocker_pmf(60, ScenarioConfig(lanes=4, rho=0.0), F_C)
        assert out[0] == pytest.approx(3 / 4) and not out[1:].any()

    @pytest.mark.parametrize("M", [2, 3, 5])
    @pytest.mark.parametrize("d", [6.0, 30.0, 150.0])
    def test_mass_is_different_lane_probability(self, M, d):
        out = different_lane_blocker_pmf(d, ScenarioConfig(lanes=M, rho=0.04), F_C)
        assert math.fsum(out) == pytest.approx((M - 1) / M, abs=1e-9)

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=SLOT_CAP)
    def test_matches_simulator(self):
        scen = ScenarioConfig(rho=0.05, placement="bumper")
        rec = cached_sim(scen, RadioConfig(), 50.0, 100_000, 12, "different-lane")
        dl = different_lane_blocker_pmf(50, scen, F_C)
        assert total_variation(dl / dl.sum(), empirical_pmf(rec)) <= 0.05


GRID = [(d, rho, M) for d in (10, 40, 80, 150, 200) for rho in (0.0, 0.01, 0.03, 0.05) for M in (1, 3, 4)]


class TestBlockerCount:
    def test_empty_road_is_los(self):
        assert blocker_count_pmf(120, ScenarioConfig(rho=0.0), F_C).los == 1.0

    @pytest.mark.parametrize("d,rho,M", GRID)
    def test_normalised(self, d, rho, M):
        pmf = blocker_count_pmf(d, ScenarioConfig(rho=rho, lanes=M), F_C)
        assert abs(math.fsum(pmf.probs) - 1) <= 1e-9
        assert np.all((pmf.probs >= 0) & (pmf.probs <= 1))

    def test_support_size(self):
        scen = ScenarioConfig(rho=0.02)
        assert blocker_count_pmf(50, scen, F_C).B == 6
        assert blocker_count_pmf(12, scen, F_C).B == 3

    @pytest.mark.parametrize("placement", ["rooftop", "bumper"])
    def test_los_monotone_in_density_and_distance(self, placement):
        rhos = np.linspace(0.0, 0.05, 11)
        ds = np.linspace(10, 200, 20)
        los = np.array([[blocker_count_pmf(d, ScenarioConfig(rho=r, placement=placement), F_C).los
                         for d in ds] for r in rhos])
        assert np.all(np.diff(los, axis=0) <= 1e-12)
        assert np.all(np.diff(los, axis=1) <= 1e-12)

    def test_fresnel_term_only_hurts(self):
        scen = ScenarioConfig(rho=0.03)
        for d in (20, 60, 150):
            with_fresnel = blocker_count_pmf(d, scen, F_C).blockage
            without = blocker_count_pmf(d, scen.with_(neglect_fresnel=True), F_C).blockage
            assert with_fresnel > without

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=SLOT_CAP)
    def test_matches_simulator(self):
        scen = ScenarioConfig(rho=0.03)
        rec = cached_sim(scen, RadioConfig(), 100.0, 100_000, 13)
        assert total_variation(blocker_count_pmf(100, scen, F_C).probs, empirical_pmf(rec)) <= 0.05


class TestExpectedBlockers:
    def test_empty_road(self):
        assert expected_blockers(100, ScenarioConfig(rho=0.0), F_C) == 0.0

    def test_monotone_in_density(self):
        means = [expected_blockers(120, ScenarioConfig(rho=r), F_C) for r in (0.01, 0.02, 0.03, 0.04, 0.05)]
        assert means == sorted(means)

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=SLOT_CAP)
    def test_matches_simulator_mean(self):
        scen = ScenarioConfig(rho=0.05)
        rec = cached_sim(scen, RadioConfig(), 150.0, 100_000, 14)
        se = rec["k"].std(ddof=1) / math.sqrt(len(rec))
        assert abs(expected_blockers(150, scen, F_C) - rec["k"].mean()) <= 3 * se


class TestDistancePdf:
    @pytest.mark.parametrize("M", [1, 3])
    def test_integrates_to_one(self, M):
        scen = ScenarioConfig(lanes=M)
        corners = [n * scen.lane_width for n in range(1, M)] + [200.0]
        top = math.hypot(200, (M - 1) * scen.lane_width)
        total, _ = integrate.quad(lambda x: distance_pdf(x, scen), 0, top, points=corners, limit=400)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_single_lane_triangular(self):
        scen = ScenarioConfig(lanes=1)
        assert distance_pdf(0.0, scen) == pytest.approx(0.01)
        assert distance_pdf(100.0, scen) == pytest.approx(2 * 100 / 200**2)
        assert distance_pdf(201.0, scen) == 0.0

    @pytest.mark.parametrize("d", [3.0, 50.0, 150.0])
    def test_cdf_is_integral_of_pdf(self, d):
        scen = ScenarioConfig()
        corners = [c for c in (4.0, 8.0) if c < d]
        total, _ = integrate.quad(lambda x: distance_pdf(x, scen), 0, d, points=corners or None, limit=400)
        assert distance_cdf(d, scen) == pytest.approx(total, abs=1e-7)

    @pytest.mark.slow
    def test_matches_sampled_pairs(self):
        scen = ScenarioConfig()
        d = sample_distances(scen, 10**6, np.random.default_rng(3))
        ks = stats.kstest(d, lambda x: distance_cdf(x, scen)).statistic
        assert ks < 0.005

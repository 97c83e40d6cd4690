import math

import numpy as np
import pytest
from scipy import stats

from src.hbf.domain import bounds
from src.hbf.domain.exceptions import InvalidArgument


class TestFalsePositive:
    @staticmethod
    def test_threshold_for_a_hundred_candidates():
        assert bounds.fp_threshold(100, 10000, 0.01) == pytest.approx(429.193, abs=1e-3)

    @staticmethod
    def test_bound_at_that_threshold_is_eps():
        assert bounds.fp_bound(100, 10000, 429.19) == pytest.approx(0.01, rel=1e-3)

    @staticmethod
    @pytest.mark.parametrize(
        "n, d, eps", [(100, 10000, 0.01), (5, 64, 0.3), (10**6, 4096, 1e-6)]
    )
    def test_threshold_round_trips_through_the_bound(n, d, eps):
        tau = bounds.fp_threshold(n, d, eps)
        assert bounds.fp_bound(n, d, tau) == pytest.approx(eps, rel=1e-12)

    @staticmethod
    def test_zero_threshold_saturates():
        assert bounds.fp_bound(1, 100, 0.0) == 1.0
        assert bounds.fp_bound(50, 100, 0.0) == 1.0

    @staticmethod
    def test_doubling_tau_raises_the_per_candidate_term_to_the_fourth():
        n, d, tau = 10, 10000, 300.0
        before = bounds.fp_bound(n, d, tau)
        after = bounds.fp_bound(n, d, 2 * tau)
        assert after == pytest.approx(n * (before / n) ** 4, rel=1e-9)

    @staticmethod
    def test_edge_cases():
        assert bounds.fp_bound(0, 100, 1.0) == 0.0
        assert bounds.fp_bound(10, 100, math.inf) == 0.0
        with pytest.raises(InvalidArgument):
            bounds.fp_bound(10, 100, -1.0)
        with pytest.raises(InvalidArgument):
            bounds.fp_threshold(10, 100, 1.0)


class TestFalseNegative:
    @staticmethod
    def test_signal_mean_worked_numbers():
        assert bounds.signal_mean(10000, 500, 0.01) == 8820
        assert bounds.signal_mean(10000, 1000, 0.1) == 6400
        assert bounds.signal_mean(4096, 0, 0.0) == 4096

    @staticmethod
    def test_bound_vanishes_in_the_worked_regime():
        assert bounds.fn_bound(10000, 500, 0.01, 100) < 1e-300

    @staticmethod
    def test_split_next_to_the_signal_saturates():
        mu = bounds.signal_mean(10000, 500, 0.01)
        assert bounds.fn_bound(10000, 500, 0.01, 0, t=mu - 1e-9) == pytest.approx(1.0)

    @staticmethod
    def test_bound_grows_with_key_noise():
        values = [bounds.fn_bound(400, h, 0.01, 10) for h in (0, 20, 40, 60, 80)]
        assert values == sorted(values)
        assert values[0] < values[-1]

    @staticmethod
    def test_split_outside_the_signal_is_rejected():
        with pytest.raises(InvalidArgument):
            bounds.fn_bound(100, 0, 0.0, 10, t=100.0)
        with pytest.raises(InvalidArgument):
            bounds.signal_mean(100, 0, 0.5)

    @staticmethod
    def test_noise_tolerance_region():
        region = bounds.noise_tolerance_region(10000, 100, 500, 0.01)
        assert region.signal == 8820
        assert region.noise_scale == pytest.approx(math.sqrt(20000 * math.log(100)))
        assert region.tolerant
        assert not bounds.noise_tolerance_region(100, 10**6, 45, 0.2).tolerant


class TestMargin:
    @staticmethod
    def test_worked_value():
        settings = bounds.margin_failure_bound(1.0, 100, 1.0, 10)
        expected = 2 * math.exp(-12.5) + 20 * math.exp(-3.125)
        assert settings.failure_bound == pytest.approx(expected, rel=1e-12)
        assert settings.failure_bound == pytest.approx(0.8789, abs=1e-4)
        assert (settings.tau, settings.delta) == (50.0, 25.0)

    @staticmethod
    def test_no_candidates_keeps_only_the_signal_term():
        settings = bounds.margin_failure_bound(1.0, 100, 1.0, 0)
        assert settings.failure_bound == pytest.approx(2 * math.exp(-12.5))

    @staticmethod
    def test_quadrupling_d_quadruples_the_exponents():
        small = bounds.margin_failure_bound(1.0, 100, 1.0, 0).failure_bound
        large = bounds.margin_failure_bound(1.0, 400, 1.0, 0).failure_bound
        assert math.log(large / 2) == pytest.approx(4 * math.log(small / 2))

    @staticmethod
    def test_saturates_at_one():
        assert bounds.margin_failure_bound(0.1, 10, 1.0, 1000).failure_bound == 1.0


class TestNormalQuantile:
    @staticmethod
    def test_known_value():
        assert bounds.inv_norm_cdf(0.975) == pytest.approx(1.959964, abs=1e-5)

    @staticmethod
    def test_matches_scipy_across_the_range():
        ps = np.concatenate(
            [
                np.logspace(-15, -1, 30),
                np.linspace(0.02, 0.98, 49),
                1 - np.logspace(-12, -2, 20),
            ]
        )
        for p in ps:
            assert bounds.inv_norm_cdf(float(p)) == pytest.approx(
                stats.norm.ppf(p), rel=1e-9, abs=1e-9
            )

    @staticmethod
    def test_symmetry():
        for p in (0.001, 0.2, 0.49):
            mirrored = -bounds.inv_norm_cdf(1 - p)
            assert bounds.inv_norm_cdf(p) == pytest.approx(mirrored, abs=1e-9)

    @staticmethod
    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_rejects_levels_outside_the_unit_interval(p):
        with pytest.raises(InvalidArgument):
            bounds.inv_norm_cdf(p)


class TestExtremeValue:
    @staticmethod
    def test_exact_threshold_matches_scipy():
        for m, eps in ((1, 0.05), (100, 0.01), (10**6, 1e-6)):
            expected = stats.norm.isf(-math.expm1(math.log1p(-eps) / m))
            assert bounds.evt_threshold_exact(2.0, m, eps) == pytest.approx(
                2.0 * expected, rel=1e-9
            )

    @staticmethod
    @pytest.mark.parametrize("m, eps", [(100, 0.1), (1000, 0.05)])
    def test_exact_threshold_by_monte_carlo(m, eps):
        runs, chunk = 10_000, 1000
        tau = bounds.evt_threshold_exact(1.0, m, eps)
        rng = np.random.default_rng(77)
        exceed = 0
        for _ in range(runs // chunk):
            exceed += int(np.sum(rng.standard_normal((chunk, m)).max(axis=1) > tau))
        rate = exceed / runs
        assert abs(rate - eps) <= 3 * math.sqrt(eps * (1 - eps) / runs)

    @staticmethod
    def test_single_candidate_is_the_plain_quantile():
        threshold = bounds.evt_threshold_exact(1.0, 1, 0.025)
        assert threshold == pytest.approx(1.959964, abs=1e-5)

    @staticmethod
    def test_expansions():
        first = bounds.evt_threshold_approx(1.0, 10**4, bounds.EVT_FIRST)
        gumbel = bounds.evt_threshold_approx(1.0, 10**4, bounds.EVT_GUMBEL)
        assert first == pytest.approx(math.sqrt(2 * math.log(10**4)))
        # the Gumbel correction pulls the first-order location down
        assert gumbel < first
        assert bounds.evt_threshold_approx(1.0, 1, bounds.EVT_FIRST) == 0.0

    @staticmethod
    def test_first_order_gap_shrinks_with_m():
        gaps = [
            abs(
                bounds.evt_threshold_approx(1.0, m, bounds.EVT_FIRST)
                - bounds.evt_threshold_exact(1.0, m, 0.5)
            )
            for m in (10**2, 10**3, 10**4)
        ]
        assert gaps[0] > gaps[1] > gaps[2]

    @staticmethod
    def test_gumbel_gap_shrinks_with_m():
        # the Gumbel location is the 1/e quantile of the maximum
        eps = 1 - 1 / math.e
        gaps = [
            abs(
                bounds.evt_threshold_approx(1.0, m, bounds.EVT_GUMBEL)
                - bounds.evt_threshold_exact(1.0, m, eps)
            )
            for m in (10**2, 10**3, 10**4, 10**5)
        ]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    @staticmethod
    def test_invalid_arguments():
        with pytest.raises(InvalidArgument):
            bounds.evt_threshold_approx(1.0, 2, bounds.EVT_GUMBEL)
        with pytest.raises(InvalidArgument):
            bounds.evt_threshold_approx(1.0, 10, "third")
        with pytest.raises(InvalidArgument):
            bounds.evt_threshold_exact(0.0, 10, 0.01)
        with pytest.raises(InvalidArgument):
            bounds.evt_threshold_exact(1.0, 0, 0.01)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_snr
from pilotopt.channel_model import scenario_from_snr_per_watt
from pilotopt.errors import ApproximationDomainError, ConfigError
from pilotopt.link_metrics import LinkState, energy_efficiency, snr_for_rate, stationarity_rhs
from pilotopt.ee_optimizer import alpha_for_rate, ee_approx_coefficients, rate_gap, solve_ee_approx, solve_ee_precise
from pilotopt.se_optimizer import Method, alpha_from_target_snr, solve_se_precise

W = 10e6


def rate_for(target_snr_plus_one, bandwidth=W):
    return bandwidth * math.log2(target_snr_plus_one)


class TestAlphaForRate:
    def test_example(self):
        assert alpha_for_rate(W, W, 1.0, 2) == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-14)

    @given(st.floats(1e4, 5e7), st.floats(1e-2, 1e4), st.integers(10, 10**5))
    def test_matches_se_kernel(self, rate, s, L):
        t = snr_for_rate(rate, W)
        if t >= 1 + L * s:
            return
        assert alpha_for_rate(rate, W, s, L) == alpha_from_target_snr(t, s, L)

    def test_limit(self):
        values = [alpha_for_rate(W, W, s, 1000) for s in (1.0, 1e3, 1e6)]
        assert values[0] > values[1] > values[2] and values[2] < 1e-4

    def test_non_positive_rate(self):
        with pytest.raises(ConfigError):
            alpha_for_rate(0.0, W, 1.0, 10)


class TestApprox:
    def test_anchor(self, unit_gain):
        rate = rate_for(11.0)
        b, c = ee_approx_coefficients(np.ones(3), 1000, rate, W)
        assert b == pytest.approx(6 * math.sqrt(11 / 1000), rel=1e-12)
        assert c == pytest.approx(29.994, rel=1e-12)
        sol = solve_ee_approx(unit_gain, rate)
        expected = ((b + math.sqrt(b * b + 4 * c * 3)) / 6) ** 2
        assert sol.min_tx_power_w == pytest.approx(expected, rel=1e-14)
        assert sol.min_tx_power_w == pytest.approx(10.684, abs=1e-3)
        assert sol.method is Method.APPROXIMATE and sol.feasible

    def test_above_perfect_csi_bound(self, unit_gain, table1):
        for sc in (unit_gain, table1):
            for se in (0.5, 2.0, 5.0):
                sol = solve_ee_approx(sc, se * W)
                assert sol.min_tx_power_w > snr_for_rate(se * W, W) / np.sum(sc.snr_per_watt())

    def test_decreasing_in_L(self):
        powers = [
            solve_ee_approx(scenario_from_snr_per_watt([1.0, 2.0, 0.5], L), rate_for(11.0)).min_tx_power_w
            for L in (10**3, 10**4, 10**5, 10**6)
        ]
        assert all(b < a for a, b in zip(powers, powers[1:]))

    def test_domain_error(self, unit_gain):
        # 2^(R/W) - 1 below 2/L
        with pytest.raises(ApproximationDomainError):
            solve_ee_approx(unit_gain, rate_for(1.001))

    def test_flags_power_limit(self, table1):
        sol = solve_ee_approx(table1, 10 * W)
        assert not sol.feasible and sol.min_tx_power_w > table1.config.max_tx_power_w


class TestPrecise:
    def test_symmetric_vs_approx(self, unit_gain):
        sol = solve_ee_precise(unit_gain, rate_for(11.0))
        assert sol.min_tx_power_w == pytest.approx(10.684, rel=0.01)
        assert sol.method is Method.PRECISE and sol.feasible

    def test_constraint_binds(self, table1):
        for se in (0.5, 2.0, 4.0, 7.5):
            rate = se * W
            sol = solve_ee_precise(table1, rate)
            target = snr_for_rate(rate, W)
            assert abs(sol.achieved_snr - target) <= 1e-10 * target

    def test_stationarity_corrected_form(self, table1):
        rate = 3.0 * W
        sol = solve_ee_precise(table1, rate)
        snrs = table1.per_bs_snr(sol.min_tx_power_w)
        rhs = stationarity_rhs(sol.allocation.ratios, snrs, 1000)
        np.testing.assert_allclose(rhs, snr_for_rate(rate, W), rtol=1e-10)

    def test_ee_consistency(self, table1):
        sol = solve_ee_precise(table1, 2.0 * W)
        assert sol.energy_efficiency_bit_per_joule == energy_efficiency(2.0 * W, sol.min_tx_power_w, table1.config)

    def test_interior_allocation(self, table1):
        sol = solve_ee_precise(table1, 5.0 * W)
        assert all(0 < a < 1 for a in sol.allocation.ratios)

    def test_monotone_in_rate(self, table1):
        ses = np.linspace(0.2, 8.0, 25)
        sols = [solve_ee_precise(table1, se * W) for se in ses]
        powers = [s.min_tx_power_w for s in sols]
        assert all(b > a for a, b in zip(powers, powers[1:]))
        ee = [s.energy_efficiency_bit_per_joule for s in sols]
        peak = int(np.argmax(ee))
        assert peak < len(ee) - 1
        assert all(b < a for a, b in zip(ee[peak:], ee[peak + 1:]))

    def test_vanishing_rate(self, table1):
        rates = (1e5, 1e3, 10.0, 0.1)
        powers = [solve_ee_precise(table1, r).min_tx_power_w for r in rates]
        assert all(b < a for a, b in zip(powers, powers[1:]))
        # at vanishing rate the optimal ratios grow, and the least power scales like sqrt(R)
        assert powers[-1] / powers[-2] == pytest.approx(0.1, rel=0.05)

    def test_infeasible_certificate(self, table1):
        sol = solve_ee_precise(table1, 10 * W)
        assert not sol.feasible
        assert sol.min_tx_power_w == pytest.approx(table1.config.max_tx_power_w)
        at_limit = solve_se_precise(table1, table1.config.max_tx_power_w)
        assert sol.achievable_rate_bps == pytest.approx(at_limit.capacity_bps)
        assert sol.achievable_rate_bps < 10 * W

    def test_duality(self, table1):
        for se in (1.0, 3.5, 6.0):
            sol = solve_ee_precise(table1, se * W)
            back = solve_se_precise(table1, sol.min_tx_power_w)
            assert back.capacity_bps == pytest.approx(se * W, rel=1e-6)

    def test_gap_function_single_crossing(self, table1):
        t = snr_for_rate(4 * W, W)
        g = table1.snr_per_watt()
        p = np.geomspace(t / (g.sum() * 1000), table1.config.max_tx_power_w, 2000)
        vals = rate_gap(p, g, 1000, t)
        assert vals[0] < 0 < vals[-1]
        assert np.count_nonzero(np.diff(np.sign(vals))) == 1

    def test_approx_gap_shrinks_with_L(self):
        gaps = []
        for L in (10**2, 10**3, 10**4, 10**5):
            sc = scenario_from_snr_per_watt([1.0, 3.0, 0.5], L)
            p = solve_ee_precise(sc, rate_for(11.0)).min_tx_power_w
            a = solve_ee_approx(sc, rate_for(11.0)).min_tx_power_w
            gaps.append(abs(a - p) / p)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    @pytest.mark.parametrize("gains,L,t1", [([1.0], 1000, 11.0), ([2.0, 0.5], 300, 5.0), ([1.0, 1.5, 0.7], 1000, 11.0)])
    def test_minimal_vs_grid(self, gains, L, t1):
        sc = scenario_from_snr_per_watt(gains, L)
        rate = rate_for(t1)
        p_star = solve_ee_precise(sc, rate).min_tx_power_w
        best, _ = brute_force_snr(np.array(gains) * p_star * 0.995, L)
        assert best < t1 - 1

    def test_bad_inputs(self, table1):
        with pytest.raises(ConfigError):
            solve_ee_precise(table1, -1.0)
        with pytest.raises(ConfigError):
            solve_ee_precise(table1, 1e6, tol=0.0)

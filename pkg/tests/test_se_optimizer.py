import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import brute_force_snr
from pilotopt.baselines import traditional_scheme
from pilotopt.channel_model import dbm_to_watt, scenario_from_snr_per_watt
from pilotopt.errors import ConfigError, InfeasibleError
from pilotopt.link_metrics import LinkState, capacity_bps, combined_snr, combined_snr_batch, stationarity_residuals
from pilotopt.se_optimizer import (
    Method,
    alpha_from_target_snr,
    fixed_point_map,
    max_combined_snr,
    se_approx_coefficients,
    solve_se_approx,
    solve_se_precise,
)


class TestAlphaFromTarget:
    def test_zero_target(self):
        # positive root of 2a^2 + 2a - 1 = 0
        assert alpha_from_target_snr(0.0, 1.0, 2) == pytest.approx((math.sqrt(3) - 1) / 2, rel=1e-14)

    def test_symmetric_anchor(self):
        assert alpha_from_target_snr(9.3583, 10.0, 1000) == pytest.approx((math.sqrt(103584) - 1) / 1e4, rel=1e-6)
        assert alpha_from_target_snr(9.3583, 10.0, 1000) == pytest.approx(0.032084, abs=1e-6)

    def test_vanishes_for_large_link_budget(self):
        values = [alpha_from_target_snr(5.0, s, 1000) for s in (1e2, 1e4, 1e6, 1e8)]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-4

    @given(st.floats(0.0, 1e4), st.floats(1e-3, 1e4), st.integers(1, 10**5))
    def test_solves_stationarity(self, target, s, L):
        k = L * s
        assume(target < 1 + k)
        a = alpha_from_target_snr(target, s, L)
        assert 0 < a < 1
        assert a * a * k + 2 * a - 1 == pytest.approx(target, rel=1e-9, abs=1e-9)

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            alpha_from_target_snr(500.0, 0.1, 100)

    def test_negative_target(self):
        with pytest.raises(ConfigError):
            alpha_from_target_snr(-1.0, 1.0, 10)


class TestPrecise:
    def test_single_bs_vs_grid(self):
        sc = scenario_from_snr_per_watt([1.0], 2)
        sol = solve_se_precise(sc, 1.0)
        grid = np.arange(1, 10000) * 1e-4
        oracle = combined_snr_batch(grid[:, None], np.array([1.0]), 2).max()
        assert sol.optimal_snr == pytest.approx(oracle, rel=1e-3)
        assert sol.optimal_snr >= oracle * (1 - 1e-12)
        assert 0 < sol.optimal_snr < 1

    def test_symmetric(self, symmetric):
        sol = solve_se_precise(symmetric, 1.0)
        assert sol.method is Method.PRECISE
        assert sol.optimal_snr == pytest.approx(9.36, abs=0.01)
        assert sol.optimal_snr == pytest.approx(solve_se_approx(symmetric, 1.0).optimal_snr, rel=0.01)
        grid = np.arange(1, 10000) * 1e-4
        oracle = combined_snr_batch(np.repeat(grid[:, None], 3, axis=1), np.full(3, 10.0), 1000).max()
        assert sol.optimal_snr >= oracle * (1 - 1e-12)
        assert sol.optimal_snr == pytest.approx(oracle, rel=1e-6)

    def test_vanishing_signal(self):
        sols = [solve_se_precise(scenario_from_snr_per_watt([s], 1000), 1.0) for s in (1e-2, 1e-4, 1e-6)]
        snrs = [s.optimal_snr for s in sols]
        assert all(b < a for a, b in zip(snrs, snrs[1:]))
        assert snrs[-1] < 1e-6
        for s in sols:
            assert 0 < s.allocation.ratios[0] < 1
        assert sols[-1].capacity_bps < 10.0

    def test_capacity_consistent(self, table1):
        sol = solve_se_precise(table1, dbm_to_watt(40.0))
        assert sol.capacity_bps == pytest.approx(capacity_bps(1e7, sol.optimal_snr), rel=1e-12)
        assert sol.spectral_efficiency == pytest.approx(math.log2(1 + sol.optimal_snr), rel=1e-14)

    @pytest.mark.parametrize("tol", [1e-6, 1e-10, 1e-12])
    def test_residuals_within_tol(self, table1, tol):
        sol = solve_se_precise(table1, dbm_to_watt(35.0), tol)
        assert max(abs(r) for r in sol.residuals) <= tol

    def test_residuals_match_recomputation(self, table1):
        p = dbm_to_watt(35.0)
        sol = solve_se_precise(table1, p)
        np.testing.assert_allclose(sol.residuals, stationarity_residuals(sol.allocation, LinkState.from_scenario(table1, p)))

    def test_power_above_limit(self, table1):
        with pytest.raises(ConfigError):
            solve_se_precise(table1, dbm_to_watt(47.0))

    def test_bad_tol(self, table1):
        with pytest.raises(ConfigError):
            solve_se_precise(table1, 1.0, tol=0.0)

    def test_boundary_optimum_reported(self):
        # weak third BS: its stationary ratio would exceed 1
        sc = scenario_from_snr_per_watt([1000.0, 1.0, 1.0], 100, max_tx_power_dbm=30.0)
        with pytest.raises(InfeasibleError):
            solve_se_precise(sc, 1.0)

    def test_fixed_point_brackets(self):
        snrs = np.array([3.0, 40.0])
        assert fixed_point_map(0.0, snrs, 100) > 0
        assert fixed_point_map(snrs.sum(), snrs, 100) < snrs.sum()

    def test_monotone_in_power(self, table1):
        powers = dbm_to_watt(np.linspace(20, 46, 20))
        snrs = [solve_se_precise(table1, p).optimal_snr for p in powers]
        assert all(b >= a for a, b in zip(snrs, snrs[1:]))

    def test_dominates_uniform(self, table1):
        p = dbm_to_watt(30.0)
        best = solve_se_precise(table1, p).optimal_snr
        for a in np.arange(0.01, 1.0, 0.01):
            assert traditional_scheme(table1, p, a) <= best

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(1.0, 3.0), min_size=1, max_size=3),
        st.sampled_from([100, 1000, 10000]),
    )
    def test_interior_and_stationary(self, log_snrs, L):
        snrs = [10 ** x for x in log_snrs]
        sc = scenario_from_snr_per_watt(snrs, L, max_tx_power_dbm=30.0)
        try:
            sol = solve_se_precise(sc, 1.0)
        except InfeasibleError:
            return
        assert all(0 < a < 1 for a in sol.allocation.ratios)
        assert max(abs(r) for r in sol.residuals) <= 1e-10

    @pytest.mark.parametrize(
        "snrs,L",
        [([30.0, 200.0], 100), ([10.0, 20.0, 40.0], 100), ([5.0, 500.0, 50.0], 1000), ([15.0], 1000)],
    )
    def test_grid_oracle(self, snrs, L):
        sc = scenario_from_snr_per_watt(snrs, L, max_tx_power_dbm=30.0)
        best, _ = brute_force_snr(np.array(snrs), L)
        assert best <= solve_se_precise(sc, 1.0).optimal_snr * 1.002


class TestApprox:
    def test_symmetric_anchor(self, symmetric):
        b, c = se_approx_coefficients(np.full(3, 10.0), 1000)
        assert b == pytest.approx(0.6, rel=1e-14)
        assert c == pytest.approx(33.006, rel=1e-14)
        sol = solve_se_approx(symmetric, 1.0)
        x = (-0.6 + math.sqrt(0.36 + 12 * 33.006)) / 6
        assert sol.optimal_snr == pytest.approx(x * x - 1, rel=1e-14)
        assert sol.optimal_snr == pytest.approx(9.35836, abs=1e-4)
        for a in sol.allocation.ratios:
            assert a == pytest.approx(0.032084, abs=1e-5)
        assert sol.method is Method.APPROXIMATE and sol.iterations == 0

    def test_closed_form_capacity_identity(self, symmetric, table1):
        for sc, p in ((symmetric, 1.0), (table1, dbm_to_watt(20.0)), (table1, dbm_to_watt(46.0))):
            sol = solve_se_approx(sc, p)
            assert sol.capacity_bps == pytest.approx(capacity_bps(sc.config.bandwidth_hz, sol.optimal_snr), rel=1e-12)

    def test_high_link_budget_regime(self):
        sc = scenario_from_snr_per_watt([100.0], 10**6, max_tx_power_dbm=30.0)
        approx = solve_se_approx(sc, 1.0).optimal_snr
        precise = solve_se_precise(sc, 1.0).optimal_snr
        assert abs(approx - precise) / precise < 1e-3

    def test_gap_shrinks_with_L(self):
        gaps = []
        for L in (10**2, 10**3, 10**4, 10**5):
            sc = scenario_from_snr_per_watt([10.0, 30.0, 5.0], L, max_tx_power_dbm=30.0)
            p, a = solve_se_precise(sc, 1.0).optimal_snr, solve_se_approx(sc, 1.0).optimal_snr
            gaps.append(abs(a - p) / p)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    @given(st.lists(st.floats(1e-4, 1e4), min_size=1, max_size=4), st.integers(1, 10**6))
    def test_never_leaves_domain(self, snrs, L):
        # x <= 1 would need 2 sqrt(k) >= k + 2 for k = L s, which never holds
        b, c = se_approx_coefficients(np.array(snrs), L)
        M = len(snrs)
        assert M + b - c < 0

import math

import numpy as np
import pytest

from pinchopt import (
    McConfig,
    OutageSpec,
    avg_snr,
    ccdf_inst_snr,
    estimate_avg_snr,
    estimate_ccdf,
    estimate_ccdf_curve,
    fixed_antenna_baseline,
    grid_search_maxmin,
    grid_search_outage,
    max_threshold_at,
    sample_channel_power,
    solve_maxmin,
    solve_outage,
)
from pinchopt.montecarlo import outage_grid_ceiling

from conftest import make_params, make_scenario, random_scenario

CFG = McConfig(samples=200_000, seed=42)


class TestMcConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McConfig(samples=0)
        with pytest.raises(ValueError):
            McConfig(batch=0)


class TestSampleChannelPower:
    def test_pure_los_deterministic(self):
        # certain LoS and vanishing NLoS power: |h|^2 -> eta / r^2
        params = make_params(beta=0.0, mu_sq=1e-30)
        rng = np.random.Generator(np.random.Philox(1))
        values = sample_channel_power(params, 150.0, rng, size=1000)
        np.testing.assert_allclose(values, params.eta / 150.0, rtol=1e-3)

    def test_blocked_is_exponential(self):
        # forced gamma = 0: |h|^2 exponential with mean mu^2 / r^2
        params = make_params(beta=1.0)  # p_los = e^-150 ~ 0
        rng = np.random.Generator(np.random.Philox(2))
        values = sample_channel_power(params, 150.0, rng, size=400_000)
        mean = params.mu_sq / 150.0
        assert values.mean() == pytest.approx(mean, rel=0.01)
        # exponential variance = mean^2; sample-variance std err ~ mean^2 sqrt(8/n)
        assert abs(values.var() - mean * mean) <= 5.0 * mean * mean * math.sqrt(8.0 / values.size)

    def test_scalar_mode(self):
        params = make_params()
        rng = np.random.Generator(np.random.Philox(3))
        value = sample_channel_power(params, 150.0, rng)
        assert isinstance(value, float) and value >= 0.0

    def test_mean_matches_formula(self):
        params = make_params(beta=0.01)
        rng = np.random.Generator(np.random.Philox(4))
        values = params.rho * sample_channel_power(params, 150.0, rng, size=500_000)
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - avg_snr(params, 150.0)) <= 3.0 * se


class TestEstimateAvgSnr:
    def test_matches_analytic(self):
        params = make_params(beta=0.01)
        est = estimate_avg_snr(params, 150.0, CFG)
        assert abs(est.mean - avg_snr(params, 150.0)) <= 3.0 * est.std_error

    def test_deterministic_channel_has_zero_error(self):
        params = make_params(beta=0.0, mu_sq=1e-30)
        est = estimate_avg_snr(params, 200.0, McConfig(samples=10_000, seed=1))
        assert est.mean == pytest.approx(params.rho * params.eta / 200.0, rel=1e-6)
        assert est.std_error <= 1e-9 * est.mean

    def test_seed_determinism(self):
        params = make_params()
        a = estimate_avg_snr(params, 150.0, CFG)
        b = estimate_avg_snr(params, 150.0, CFG)
        assert a == b

    def test_batch_split_changes_nothing_statistical(self):
        params = make_params()
        small = estimate_avg_snr(params, 150.0, McConfig(samples=100_000, seed=5, batch=10_000))
        assert abs(small.mean - avg_snr(params, 150.0)) <= 4.0 * small.std_error

    def test_clt_scaling(self):
        params = make_params()
        one = estimate_avg_snr(params, 150.0, McConfig(samples=100_000, seed=6))
        two = estimate_avg_snr(params, 150.0, McConfig(samples=200_000, seed=6))
        ratio = one.std_error / two.std_error
        assert 1.3 <= ratio <= 1.55

    def test_phase_independence(self):
        params = make_params()
        a = estimate_avg_snr(params, 150.0, CFG, x_pin=0.0)
        b = estimate_avg_snr(params, 150.0, CFG, x_pin=17.3)
        combined = math.hypot(a.std_error, b.std_error)
        assert abs(a.mean - b.mean) <= 3.0 * combined


class TestEstimateCcdf:
    def test_zero_threshold_exact_one(self):
        est = estimate_ccdf(make_params(), 150.0, 0.0, McConfig(samples=50_000, seed=7))
        assert est.mean == 1.0
        assert est.std_error > 0.0  # continuity floor keeps the bar positive

    def test_nlos_median(self):
        params = make_params(beta=1.0)  # pure NLoS at r^2 = 150
        t = params.rho * params.mu_sq * math.log(2.0) / 150.0
        est = estimate_ccdf(params, 150.0, t, CFG)
        assert abs(est.mean - 0.5) <= 3.0 * est.std_error

    def test_plateau_matches_los_probability(self):
        params = make_params(beta=0.01)
        t_mid = 2.0 * params.rho * math.sqrt(params.eta * params.mu_sq) / 150.0
        est = estimate_ccdf(params, 150.0, t_mid, CFG)
        assert abs(est.mean - math.exp(-0.01 * 150.0)) <= 3.0 * est.std_error

    def test_matches_analytic_formula(self):
        params = make_params(beta=0.004)
        for t in (1e2, 1e3, 3e4):
            est = estimate_ccdf(params, 150.0, t, CFG)
            assert abs(est.mean - ccdf_inst_snr(params, 150.0, t)) <= 3.0 * est.std_error

    def test_curve_matches_pointwise(self):
        params = make_params()
        ts = [0.0, 1e2, 1e3, 1e4]
        curve = estimate_ccdf_curve(params, 150.0, ts, CFG)
        for t, est in zip(ts, curve):
            single = estimate_ccdf(params, 150.0, t, CFG)
            assert est == single  # same draws, same counts


class TestGridSearchMaxmin:
    def test_single_user_grid_snaps_to_user(self):
        sc = make_scenario([(12.0, 3.0)], dx=30.0)
        sol = grid_search_maxmin(sc, 3001)
        assert sol.x_star == pytest.approx(12.0, abs=30.0 / 3000)

    def test_refinement_converges_upward(self):
        sc = make_scenario([(4.0, 1.0), (18.0, -3.0), (27.0, 4.0)])
        coarse = grid_search_maxmin(sc, 1_000)
        fine = grid_search_maxmin(sc, 100_000)
        assert fine.t_star >= coarse.t_star - 1e-12
        assert fine.meta["t_slack"] < coarse.meta["t_slack"]

    def test_agrees_with_solver(self):
        rng = np.random.Generator(np.random.Philox(18))
        for _ in range(5):
            sc = random_scenario(rng, 4)
            sol = solve_maxmin(sc)
            grid = grid_search_maxmin(sc, 100_000)
            assert abs(sol.t_star - grid.t_star) / sol.t_star <= 1e-3

    def test_grid_never_beats_continuum(self):
        sc = make_scenario([(4.0, 1.0), (18.0, -3.0)])
        sol = solve_maxmin(sc)
        grid = grid_search_maxmin(sc, 10_000)
        assert grid.t_star <= sol.t_star * (1.0 + 1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            grid_search_maxmin(make_scenario([(1.0, 0.0)]), 1)


class TestGridSearchOutage:
    def test_single_user(self):
        sc = make_scenario([(12.0, 3.0)], dx=30.0)
        spec = OutageSpec.shared(0.1, 1)
        sol = grid_search_outage(sc, spec, 3001, 1001)
        assert sol.x_star == pytest.approx(12.0, abs=30.0 / 3000)

    def test_agrees_with_solver(self):
        rng = np.random.Generator(np.random.Philox(19))
        for _ in range(4):
            sc = random_scenario(rng, 2)
            spec = OutageSpec.shared(0.1, 2)
            sol = solve_outage(sc, spec)
            grid = grid_search_outage(sc, spec, 10_000, 1_000)
            assert grid.t_star <= sol.t_star * (1.0 + 3e-3)
            x_sp, t_sp = grid.meta["x_spacing"], grid.meta["t_spacing"]
            x_near = min(round(sol.x_star / x_sp) * x_sp, sc.dx)
            allowed = (sol.t_star - max_threshold_at(sc, spec, x_near)) + t_sp \
                + 1e-3 * sol.t_star
            assert sol.t_star - grid.t_star <= allowed + 1e-9 * sol.t_star

    def test_vacuous_constraints_reach_grid_top(self):
        sc = make_scenario([(15.0, 0.0)], dx=30.0)
        spec = OutageSpec.shared(0.999, 1)
        ceiling = outage_grid_ceiling(sc, spec)
        sol = grid_search_outage(sc, spec, 501, np.linspace(0.0, 0.5 * ceiling, 101))
        assert sol.t_star == pytest.approx(0.5 * ceiling, rel=1e-12)

    def test_explicit_grid_validation(self):
        sc = make_scenario([(15.0, 0.0)])
        spec = OutageSpec.shared(0.1, 1)
        with pytest.raises(ValueError):
            grid_search_outage(sc, spec, 100, np.array([1.0, 2.0]))  # must start at 0
        with pytest.raises(ValueError):
            grid_search_outage(sc, spec, 1, 100)


class TestDominance:
    def test_grid_oracle_confirms_pinching_gain(self):
        rng = np.random.Generator(np.random.Philox(20))
        sc = random_scenario(rng, 4, dx=40.0)
        assert grid_search_maxmin(sc, 20_000).t_star >= \
            fixed_antenna_baseline(sc).t_star * (1.0 - 1e-12)

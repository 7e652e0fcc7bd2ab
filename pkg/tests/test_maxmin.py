import math

import numpy as np
import pytest

from pinchopt import (
    BoundaryRegime,
    InfeasibleThreshold,
    Interval,
    InvalidScenario,
    SolverTolerances,
    UnsupportedScenario,
    f_scalar,
    feasibility_avg,
    fixed_antenna_baseline,
    invert_f,
    min_avg_snr,
    solve_maxmin,
    squared_distance_range,
    two_user_closed_form,
    user_interval_avg,
)
from pinchopt.model import ChannelParams

from conftest import make_params, make_scenario, random_scenario

TOL = SolverTolerances()


class TestInterval:
    def test_empty_marker(self):
        empty = Interval.make_empty()
        assert empty.empty
        assert not empty.contains(0.0)
        assert empty.intersect(Interval(0.0, 1.0)).empty

    def test_intersection(self):
        left = Interval(0.0, 2.0)
        right = Interval(1.0, 3.0)
        out = left.intersect(right)
        assert (out.lo, out.hi) == (1.0, 2.0)
        assert left.intersect(Interval(2.5, 3.0)).empty

    def test_midpoint_and_width(self):
        iv = Interval(1.0, 3.0)
        assert iv.midpoint == 2.0
        assert iv.width == 2.0
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)
        with pytest.raises(ValueError):
            Interval.make_empty().midpoint


class TestSolverTolerances:
    def test_defaults(self):
        assert TOL.eps_t == 1e-3
        assert TOL.eps_y is None
        assert TOL.max_iter == 200

    def test_auto_inner_tolerance(self):
        sc = make_scenario([(10.0, 5.0)])
        rng = squared_distance_range(sc, 0)
        assert TOL.inner_tol(rng) == pytest.approx(1e-9 * rng.y_max)

    @pytest.mark.parametrize("kwargs", [dict(eps_t=0.0), dict(eps_y=-1.0), dict(max_iter=0)])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SolverTolerances(**kwargs)


class TestInvertF:
    def test_fixed_point_at_vertex(self):
        sc = make_scenario([(15.0, 0.0)], dx=30.0)
        rng = squared_distance_range(sc, 0)
        params = sc.channels[0]
        assert invert_f(params, f_scalar(params, rng.y_min), rng, 1e-9) == rng.y_min

    def test_bracket_endpoint(self):
        sc = make_scenario([(10.0, 5.0)], dx=30.0)
        rng = squared_distance_range(sc, 0)
        params = sc.channels[0]
        assert invert_f(params, f_scalar(params, rng.y_max), rng, 1e-9) == rng.y_max

    def test_round_trip_recovers_target(self):
        rng_np = np.random.Generator(np.random.Philox(5))
        sc = make_scenario([(10.0, 5.0)], dx=30.0)
        rng = squared_distance_range(sc, 0)
        params = sc.channels[0]
        eps_y = 1e-9 * rng.y_max
        for _ in range(50):
            y_target = float(rng_np.uniform(rng.y_min, rng.y_max))
            alpha = invert_f(params, f_scalar(params, y_target), rng, eps_y)
            assert abs(alpha - y_target) <= eps_y

    def test_infeasible_raises(self):
        sc = make_scenario([(10.0, 5.0)])
        rng = squared_distance_range(sc, 0)
        params = sc.channels[0]
        with pytest.raises(InfeasibleThreshold):
            invert_f(params, 1.01 * f_scalar(params, rng.y_min), rng, 1e-9)

    def test_below_range_returns_y_max(self):
        sc = make_scenario([(10.0, 5.0)])
        rng = squared_distance_range(sc, 0)
        params = sc.channels[0]
        assert invert_f(params, 0.5 * f_scalar(params, rng.y_max), rng, 1e-9) == rng.y_max


class TestUserIntervalAvg:
    def test_tiny_interval_near_peak(self):
        sc = make_scenario([(15.0, 0.0)], dx=30.0)
        peak = f_scalar(sc.channels[0], sc.c_const(0))
        iv = user_interval_avg(sc, 0, 0.999 * peak, TOL)
        assert not iv.empty
        assert iv.contains(15.0)
        assert iv.width < 1.0

    def test_above_peak_empty(self):
        sc = make_scenario([(15.0, 0.0)], dx=30.0)
        peak = f_scalar(sc.channels[0], sc.c_const(0))
        assert user_interval_avg(sc, 0, 1.001 * peak, TOL).empty

    def test_low_target_full_range(self):
        sc = make_scenario([(10.0, 5.0)], dx=30.0)
        rng = squared_distance_range(sc, 0)
        t = 0.9 * f_scalar(sc.channels[0], rng.y_max)
        iv = user_interval_avg(sc, 0, t, TOL)
        assert (iv.lo, iv.hi) == (0.0, 30.0)


class TestFeasibilityAvg:
    def test_single_user_equals_own_interval(self):
        sc = make_scenario([(10.0, 5.0)])
        t = 0.7 * f_scalar(sc.channels[0], sc.c_const(0))
        own = user_interval_avg(sc, 0, t, TOL)
        both = feasibility_avg(sc, t, TOL)
        assert (own.lo, own.hi) == (both.lo, both.hi)

    def test_disjoint_users_empty(self):
        sc = make_scenario([(0.0, 0.0), (30.0, 0.0)], dx=30.0)
        t = 0.999 * f_scalar(sc.channels[0], sc.c_const(0))
        assert feasibility_avg(sc, t, TOL).empty

    def test_nested_in_t(self):
        rng = np.random.Generator(np.random.Philox(6))
        for _ in range(25):
            sc = random_scenario(rng, 3)
            peak = min(f_scalar(sc.channels[m], squared_distance_range(sc, m).y_min)
                       for m in range(3))
            t1, t2 = sorted(rng.uniform(0.0, peak, 2))
            outer = feasibility_avg(sc, float(t1), TOL)
            inner = feasibility_avg(sc, float(t2), TOL)
            if not inner.empty:
                assert not outer.empty
                assert outer.lo <= inner.lo + 1e-9 and inner.hi <= outer.hi + 1e-9


class TestSolveMaxmin:
    def test_single_interior_user(self):
        sc = make_scenario([(12.0, 3.0)], dx=30.0)
        sol = solve_maxmin(sc)
        assert sol.x_star == pytest.approx(12.0, abs=1e-6)
        assert sol.t_star == pytest.approx(f_scalar(sc.channels[0], sc.c_const(0)), rel=1e-9)

    def test_certificate(self):
        rng = np.random.Generator(np.random.Philox(7))
        for _ in range(10):
            sc = random_scenario(rng, 4)
            sol = solve_maxmin(sc)
            assert not feasibility_avg(sc, sol.meta["bracket_lo"], TOL).empty
            assert feasibility_avg(sc, sol.t_star * (1.0 + 3.0 * TOL.eps_t), TOL).empty

    def test_reported_level_is_achieved(self):
        rng = np.random.Generator(np.random.Philox(8))
        for _ in range(10):
            sc = random_scenario(rng, 3)
            sol = solve_maxmin(sc)
            assert min_avg_snr(sc, sol.x_star) == sol.t_star
            assert sol.t_star >= sol.meta["bracket_lo"] * (1.0 - 1e-12)

    def test_bracket_width_at_convergence(self):
        sc = make_scenario([(5.0, 2.0), (22.0, -4.0)])
        sol = solve_maxmin(sc)
        assert sol.meta["bracket_hi"] - sol.meta["bracket_lo"] <= TOL.eps_t * sol.meta["bracket_lo"]

    def test_iteration_bound(self):
        rng = np.random.Generator(np.random.Philox(9))
        for _ in range(10):
            sc = random_scenario(rng, 4)
            sol = solve_maxmin(sc)
            bound = math.ceil(math.log2(sol.meta["t_hi_init"] / (TOL.eps_t * sol.t_star))) + 1
            assert sol.outer_iterations <= bound

    def test_x_star_inside_feasible(self):
        sc = make_scenario([(4.0, 1.0), (18.0, -3.0), (29.0, 4.0)])
        sol = solve_maxmin(sc)
        assert sol.feasible.contains(sol.x_star)
        assert 0.0 <= sol.x_star <= sc.dx

    def test_per_user_bounds_reported(self):
        sc = make_scenario([(4.0, 1.0), (18.0, -3.0)])
        sol = solve_maxmin(sc)
        assert len(sol.per_user_bounds) == 2
        for m, alpha in enumerate(sol.per_user_bounds):
            assert f_scalar(sc.channels[m], alpha) == pytest.approx(
                sol.meta["bracket_lo"], rel=1e-6
            )


class TestTwoUserClosedForm:
    def test_degenerate_same_position(self):
        sc = make_scenario([(10.0, 2.0), (10.0, -4.0)])
        sol = two_user_closed_form(sc)
        assert sol.x_star == 10.0
        assert sol.meta["alpha_star"] == pytest.approx(max(sc.c_const(0), sc.c_const(1)))

    def test_symmetric_offsets_midpoint(self):
        sc = make_scenario([(8.0, 3.0), (20.0, -3.0)])
        sol = two_user_closed_form(sc)
        assert sol.x_star == pytest.approx(14.0, rel=1e-12)
        assert sol.meta["alpha_star"] == pytest.approx(36.0 + sc.c_const(0), rel=1e-12)

    def test_close_users_antenna_at_limiting_user(self):
        # |x2 - x1| below sqrt(C_max - C_min): place at the larger-offset user
        sc = make_scenario([(10.0, 0.0), (12.0, 5.0)])
        assert math.sqrt(sc.c_const(1) - sc.c_const(0)) > 2.0
        sol = two_user_closed_form(sc)
        assert sol.x_star == 12.0
        assert sol.meta["alpha_star"] == pytest.approx(sc.c_const(1))

    def test_biased_midpoint_shifts_toward_larger_offset(self):
        sc = make_scenario([(5.0, 0.0), (25.0, 5.0)])
        sol = two_user_closed_form(sc)
        assert sol.x_star > 15.0

    def test_matches_bisection(self):
        rng = np.random.Generator(np.random.Philox(10))
        for _ in range(25):
            sc = random_scenario(rng, 2)
            closed = two_user_closed_form(sc)
            solved = solve_maxmin(sc)
            assert abs(closed.t_star - solved.t_star) / closed.t_star <= 10.0 * TOL.eps_t
            assert abs(closed.x_star - solved.x_star) <= solved.feasible.width + 1e-9

    def test_order_independent(self):
        a = make_scenario([(20.0, -1.0), (6.0, 4.0)])
        b = make_scenario([(6.0, 4.0), (20.0, -1.0)])
        assert two_user_closed_form(a).x_star == two_user_closed_form(b).x_star

    def test_wrong_user_count(self):
        with pytest.raises(InvalidScenario):
            two_user_closed_form(make_scenario([(10.0, 0.0)]))

    def test_unequal_parameters(self):
        base = make_scenario([(10.0, 0.0), (20.0, 0.0)])
        other = ChannelParams(
            beta=base.channels[0].beta, eta=base.channels[0].eta,
            mu_sq=2e-9, rho=base.channels[0].rho,
            guided_wavelength=base.channels[0].guided_wavelength,
            carrier_wavelength=base.channels[0].carrier_wavelength,
        )
        sc = make_scenario([(10.0, 0.0), (20.0, 0.0)])
        sc = type(sc)(dx=sc.dx, dy=sc.dy, dv=sc.dv, users=sc.users,
                      channels=(sc.channels[0], other))
        with pytest.raises(UnsupportedScenario):
            two_user_closed_form(sc)

    def test_boundary_regime_guard(self):
        # users inside the region always give an interior optimum, so force
        # a corrupted position to exercise the defensive contract
        sc = make_scenario([(1.0, 0.0), (8.0, 4.9)], dx=30.0)
        object.__setattr__(sc.users[0], "x", -40.0)
        with pytest.raises(BoundaryRegime):
            two_user_closed_form(sc)


class TestFixedBaseline:
    def test_position_and_value(self):
        sc = make_scenario([(10.0, 5.0), (25.0, -2.0)], dx=30.0)
        sol = fixed_antenna_baseline(sc)
        assert sol.x_star == 15.0
        assert sol.t_star == pytest.approx(min_avg_snr(sc, 15.0), rel=1e-14)

    def test_coincides_with_optimum_for_centered_user(self):
        sc = make_scenario([(15.0, 0.0)], dx=30.0)
        assert fixed_antenna_baseline(sc).t_star == pytest.approx(
            solve_maxmin(sc).t_star, rel=1e-6
        )

    def test_never_beats_solver(self):
        rng = np.random.Generator(np.random.Philox(11))
        for _ in range(25):
            sc = random_scenario(rng, 4)
            assert solve_maxmin(sc).t_star >= fixed_antenna_baseline(sc).t_star * (1.0 - 1e-12)

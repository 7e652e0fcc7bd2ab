"""Max-min average-SNR antenna placement via nested-interval bisection.

For a target level t, user m's constraint avg_snr >= t is equivalent to
r_m^2(x) <= alpha_m(t) with f(alpha_m(t)) = t, so the feasible positions
form the interval [x_m - d_m, x_m + d_m] ∩ [0, dx], d_m =
sqrt(max(alpha_m - C_m, 0)). Intersections of such intervals shrink
monotonically in t, which makes the epigraph problem solvable by plain
bisection on t with only scalar inner root-finds. A two-user closed form
(equal per-user parameters) is available as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    InvalidScenario,
    Scenario,
    SquaredDistanceRange,
    avg_snr,
    distance_squared,
    f_scalar,
    squared_distance_range,
)

# Relative y-space tolerance used when SolverTolerances.eps_y is left None.
AUTO_EPS_Y_REL = 1e-9
# Golden-section shrink factor and relative x tolerance for the final polish.
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_POLISH_XTOL_REL = 1e-11


class InfeasibleThreshold(Exception):
    """The requested level exceeds the user's maximum achievable value."""


class UnsupportedScenario(ValueError):
    """Scenario violates an assumption of the closed-form solution."""


class BoundaryRegime(RuntimeError):
    """Closed-form optimum falls outside [0, dx]; use solve_maxmin instead."""


class SolverAnomaly(RuntimeError):
    """Bisection failed to certify a feasible level; indicates broken inputs."""


@dataclass(frozen=True)
class Interval:
    """Closed interval on the waveguide axis, with an explicit empty marker."""

    lo: float = math.nan
    hi: float = math.nan
    empty: bool = False

    def __post_init__(self):
        if not self.empty and not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def make_empty(cls) -> "Interval":
        return cls(empty=True)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    @property
    def midpoint(self) -> float:
        if self.empty:
            raise ValueError("empty interval has no midpoint")
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return (not self.empty) and self.lo - slack <= x <= self.hi + slack

    def intersect(self, other: "Interval") -> "Interval":
        if self.empty or other.empty:
            return Interval.make_empty()
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return Interval.make_empty()
        return Interval(lo, hi)


@dataclass(frozen=True)
class SolverTolerances:
    """eps_t: relative outer tolerance on t; eps_y: absolute inner tolerance
    in m^2 (None selects 1e-9 * y_max per user); max_iter caps the outer loop.
    The inner tolerance doubles as eps_u for the outage solver."""

    eps_t: float = 1e-3
    eps_y: float | None = None
    max_iter: int = 200

    def __post_init__(self):
        if not self.eps_t > 0.0:
            raise ValueError(f"eps_t must be positive, got {self.eps_t}")
        if self.eps_y is not None and not self.eps_y > 0.0:
            raise ValueError(f"eps_y must be positive, got {self.eps_y}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def inner_tol(self, rng: SquaredDistanceRange) -> float:
        return self.eps_y if self.eps_y is not None else AUTO_EPS_Y_REL * rng.y_max


@dataclass(frozen=True)
class Solution:
    """Solver output: achieved level t_star at position x_star.

    feasible is the final certified interval, per_user_bounds the squared-
    distance thresholds at the certified level (None for baselines and grid
    searches). meta carries diagnostics such as the outer bracket
    (bracket_lo/bracket_hi) or grid slack estimates.
    """

    t_star: float
    x_star: float
    feasible: Interval
    outer_iterations: int
    per_user_bounds: tuple[float, ...] | None = None
    meta: dict = field(default_factory=dict)


def invert_f(params, t: float, rng: SquaredDistanceRange, eps_y: float) -> float:
    """Solve f(alpha) = t for alpha in [y_min, y_max] by bisection.

    Returns the lower end of the final bracket, so callers build intervals
    that never overstate feasibility. t above f(y_min) raises
    InfeasibleThreshold; t at or below f(y_max) returns y_max (the whole
    range satisfies the constraint).
    """
    f_at_min = f_scalar(params, rng.y_min)
    if t > f_at_min:
        raise InfeasibleThreshold(
            f"target {t} exceeds the maximum achievable value {f_at_min}"
        )
    if t == f_at_min:
        return rng.y_min
    if t <= f_scalar(params, rng.y_max):
        return rng.y_max
    lo, hi = rng.y_min, rng.y_max
    while hi - lo > eps_y:
        mid = 0.5 * (lo + hi)
        if f_scalar(params, mid) >= t:
            lo = mid
        else:
            hi = mid
    return lo


def user_interval_avg(scenario: Scenario, user_index: int, t: float, tol: SolverTolerances) -> Interval:
    """Feasible positions for one user at level t: |x_m - x| <= d_m, clipped."""
    rng = squared_distance_range(scenario, user_index)
    try:
        alpha = invert_f(scenario.channels[user_index], t, rng, tol.inner_tol(rng))
    except InfeasibleThreshold:
        return Interval.make_empty()
    return _interval_from_bound(scenario, user_index, alpha)


def _interval_from_bound(scenario: Scenario, user_index: int, bound: float) -> Interval:
    c = scenario.c_const(user_index)
    d = math.sqrt(max(bound - c, 0.0))
    x_m = scenario.users[user_index].x
    return Interval(x_m - d, x_m + d).intersect(Interval(0.0, scenario.dx))


def feasibility_avg(scenario: Scenario, t: float, tol: SolverTolerances | None = None) -> Interval:
    """Intersection of all per-user feasibility intervals at level t."""
    tol = tol or SolverTolerances()
    out = Interval(0.0, scenario.dx)
    for m in range(scenario.n_users):
        out = out.intersect(user_interval_avg(scenario, m, t, tol))
        if out.empty:
            break
    return out


def min_avg_snr(scenario: Scenario, x_pin: float) -> float:
    """Worst-user average SNR at a given antenna position (the objective)."""
    return min(
        avg_snr(scenario.channels[m], distance_squared(scenario.users[m], scenario.dv, x_pin))
        for m in range(scenario.n_users)
    )


def _argmax_quasiconcave(objective, lo: float, hi: float) -> float:
    """Golden-section maximizer for a strictly quasiconcave objective."""
    if hi <= lo:
        return lo
    # floor the tolerance at ulp scale so the bracket can always shrink
    xtol = max(_POLISH_XTOL_REL * (hi - lo), 1e-13 * max(abs(lo), abs(hi), 1.0))
    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(200):
        if b - a <= xtol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = objective(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = objective(x1)
    return 0.5 * (a + b)


def _bisect_threshold(feasible_at, t_hi_init: float, tol: SolverTolerances):
    """Shared outer loop: grow t_lo / shrink t_hi on interval emptiness.

    feasible_at(t) must return (Interval, bounds) with nested intervals in
    t. Returns (t_lo, t_hi, interval, bounds, iterations).
    """
    t_lo = 0.0
    t_hi = t_hi_init
    best, bounds = feasible_at(0.0)
    iters = 0
    while iters < tol.max_iter:
        if t_lo > 0.0 and t_hi - t_lo <= tol.eps_t * t_lo:
            break
        t_mid = 0.5 * (t_lo + t_hi)
        iters += 1
        interval, mid_bounds = feasible_at(t_mid)
        if interval.empty:
            t_hi = t_mid
        else:
            t_lo, best, bounds = t_mid, interval, mid_bounds
    if t_lo <= 0.0:
        raise SolverAnomaly("no positive feasible level found within max_iter")
    return t_lo, t_hi, best, bounds, iters


def solve_maxmin(scenario: Scenario, tol: SolverTolerances | None = None) -> Solution:
    """Globally maximize the minimum average SNR over the antenna position.

    Outer bisection on the guaranteed level t between 0 (always feasible)
    and twice the best single-user SNR (structurally infeasible); each
    probe runs one scalar inversion per user. The returned t_star is the
    exact objective at x_star, which is the golden-section argmax over the
    final certified interval; Solution.meta carries the bisection bracket.
    """
    tol = tol or SolverTolerances()
    ranges = [squared_distance_range(scenario, m) for m in range(scenario.n_users)]
    inner = [tol.inner_tol(r) for r in ranges]
    gamma_max = [f_scalar(scenario.channels[m], ranges[m].y_min) for m in range(scenario.n_users)]

    def feasible_at(t: float):
        out = Interval(0.0, scenario.dx)
        bounds = []
        for m in range(scenario.n_users):
            if t > gamma_max[m]:
                return Interval.make_empty(), None
            alpha = invert_f(scenario.channels[m], t, ranges[m], inner[m])
            bounds.append(alpha)
            out = out.intersect(_interval_from_bound(scenario, m, alpha))
            if out.empty:
                return out, None
        return out, tuple(bounds)

    t_hi_init = 2.0 * max(gamma_max)
    t_lo, t_hi, interval, bounds, iters = _bisect_threshold(feasible_at, t_hi_init, tol)
    x_star = _argmax_quasiconcave(lambda x: min_avg_snr(scenario, x), interval.lo, interval.hi)
    return Solution(
        t_star=min_avg_snr(scenario, x_star),
        x_star=x_star,
        feasible=interval,
        outer_iterations=iters,
        per_user_bounds=bounds,
        meta={"bracket_lo": t_lo, "bracket_hi": t_hi, "t_hi_init": t_hi_init},
    )


def two_user_closed_form(scenario: Scenario) -> Solution:
    """Closed-form optimum for two users with shared channel parameters.

    With Delta = |x_2 - x_1| and C_max/C_min the larger/smaller offsets:
    if Delta <= sqrt(C_max - C_min) the antenna sits at the limiting user
    and alpha* = C_max (Delta = 0 included); otherwise alpha* =
    Delta^2/4 + (C_1+C_2)/2 + (C_1-C_2)^2/(4 Delta^2) and x* is the biased
    midpoint (x_1+x_2)/2 + (C_2-C_1)/(2 Delta). t* = f(alpha*).
    """
    if scenario.n_users != 2:
        raise InvalidScenario(f"closed form needs exactly 2 users, got {scenario.n_users}")
    p1, p2 = scenario.channels
    for name in ("rho", "mu_sq", "beta", "eta"):
        if getattr(p1, name) != getattr(p2, name):
            raise UnsupportedScenario(
                f"closed form assumes equal per-user parameters; {name} differs "
                f"({getattr(p1, name)} vs {getattr(p2, name)})"
            )
    (u1, u2) = scenario.users
    if u1.x > u2.x:
        u1, u2 = u2, u1
    c1 = u1.y * u1.y + scenario.dv * scenario.dv
    c2 = u2.y * u2.y + scenario.dv * scenario.dv
    delta = u2.x - u1.x
    c_max = max(c1, c2)
    c_min = min(c1, c2)
    if delta <= math.sqrt(c_max - c_min):
        alpha = c_max
        x_star = u2.x if c2 >= c1 else u1.x
    else:
        alpha = 0.25 * delta * delta + 0.5 * (c1 + c2) + (c1 - c2) ** 2 / (4.0 * delta * delta)
        x_star = 0.5 * (u1.x + u2.x) + (c2 - c1) / (2.0 * delta)
    if not 0.0 <= x_star <= scenario.dx:
        raise BoundaryRegime(
            f"closed-form optimum x={x_star} lies outside [0, {scenario.dx}]; "
            "solve_maxmin handles the constrained case"
        )
    return Solution(
        t_star=f_scalar(p1, alpha),
        x_star=x_star,
        feasible=Interval(x_star, x_star),
        outer_iterations=0,
        per_user_bounds=(alpha, alpha),
        meta={"alpha_star": alpha},
    )


def fixed_antenna_baseline(scenario: Scenario) -> Solution:
    """Conventional fixed deployment at the region midpoint dx/2."""
    x_fix = 0.5 * scenario.dx
    return Solution(
        t_star=min_avg_snr(scenario, x_fix),
        x_star=x_fix,
        feasible=Interval(x_fix, x_fix),
        outer_iterations=0,
        per_user_bounds=None,
    )

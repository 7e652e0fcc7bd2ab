"""Outage-constrained SNR-threshold maximization.

Each user's reliability constraint P[snr >= t] >= 1 - eps_m pins, through
the strict monotonicity of the CCDF in the squared distance, an upper
bound U_m(t) on r_m^2, hence a position interval J_m(t). The intervals
are nested in t, so the largest threshold with a nonempty intersection
T(t) = ∩ J_m(t) is found by the same outer bisection as the average-SNR
design, with the inner scalar inversion now running on the CCDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .maxmin import (
    Interval,
    SolverAnomaly,
    SolverTolerances,
    Solution,
    _argmax_quasiconcave,
    _bisect_threshold,
    _interval_from_bound,
)
from .model import Scenario, distance_squared, squared_distance_range
from .special import ccdf_inst_snr

_BRACKET_DOUBLINGS = 80


@dataclass(frozen=True)
class OutageSpec:
    """Per-user outage probabilities eps_m, each in (0, 1)."""

    epsilons: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(self.epsilons))
        for m, eps in enumerate(self.epsilons):
            if not 0.0 < eps < 1.0:
                raise ValueError(f"epsilons[{m}] must lie in (0, 1), got {eps}")

    @classmethod
    def shared(cls, epsilon: float, n_users: int) -> "OutageSpec":
        return cls(epsilons=(epsilon,) * n_users)

    def for_scenario(self, scenario: Scenario) -> "OutageSpec":
        if len(self.epsilons) != scenario.n_users:
            raise ValueError(
                f"{len(self.epsilons)} outage targets for {scenario.n_users} users"
            )
        return self


def invert_ccdf(params, t: float, epsilon: float, rng, eps_u: float) -> float | None:
    """Largest y in [y_min, y_max] with ccdf(y, t) >= 1 - epsilon.

    None marks infeasibility (even y_min misses the target); y_max means
    the constraint binds nowhere on the deployment range. Otherwise the
    unique root of the strictly decreasing CCDF is bracketed to eps_u and
    its conservative (lower) end is returned.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    target = 1.0 - epsilon
    if ccdf_inst_snr(params, rng.y_min, t) < target:
        return None
    if ccdf_inst_snr(params, rng.y_max, t) >= target:
        return rng.y_max
    lo, hi = rng.y_min, rng.y_max
    while hi - lo > eps_u:
        mid = 0.5 * (lo + hi)
        if ccdf_inst_snr(params, mid, t) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def user_interval_outage(
    scenario: Scenario, user_index: int, t: float, epsilon: float, tol: SolverTolerances
) -> Interval:
    """Positions where user user_index meets its outage target at level t."""
    rng = squared_distance_range(scenario, user_index)
    bound = invert_ccdf(scenario.channels[user_index], t, epsilon, rng, tol.inner_tol(rng))
    if bound is None:
        return Interval.make_empty()
    return _interval_from_bound(scenario, user_index, bound)


def feasibility_outage(
    scenario: Scenario, spec: OutageSpec, t: float, tol: SolverTolerances | None = None
) -> Interval:
    """T(t): intersection of all users' outage-feasible intervals."""
    tol = tol or SolverTolerances()
    spec = spec.for_scenario(scenario)
    out = Interval(0.0, scenario.dx)
    for m in range(scenario.n_users):
        out = out.intersect(user_interval_outage(scenario, m, t, spec.epsilons[m], tol))
        if out.empty:
            break
    return out


def _threshold_root(params, y: float, epsilon: float, t_hi_seed: float, rel_tol: float = 1e-12) -> float:
    """Largest t with ccdf(y, t) >= 1 - epsilon, by bisection on t."""
    target = 1.0 - epsilon
    hi = max(t_hi_seed, 1e-300)
    for _ in range(_BRACKET_DOUBLINGS):
        if ccdf_inst_snr(params, y, hi) < target:
            break
        hi *= 2.0
    else:
        raise SolverAnomaly(f"no finite threshold violates the outage target at y={y}")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if ccdf_inst_snr(params, y, mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def max_threshold_at(scenario: Scenario, spec: OutageSpec, x_pin: float) -> float:
    """Exact objective: largest t meeting every outage target at x_pin."""
    spec = spec.for_scenario(scenario)
    best = math.inf
    for m in range(scenario.n_users):
        params = scenario.channels[m]
        y = distance_squared(scenario.users[m], scenario.dv, x_pin)
        seed = 2.0 * params.rho * params.eta / y
        best = min(best, _threshold_root(params, y, spec.epsilons[m], seed))
    return best


def solve_outage(
    scenario: Scenario, spec: OutageSpec, tol: SolverTolerances | None = None
) -> Solution:
    """Globally maximize the outage-guaranteed threshold over the position.

    Outer bisection on t with T(t) feasibility probes; the initial upper
    bracket 2 max_m rho_m eta_m / y_{m,min} (past the LoS-limited drop) is
    doubled until T is verifiably empty. x_star maximizes the exact
    per-position threshold over the final interval; t_star is its value.
    """
    tol = tol or SolverTolerances()
    spec = spec.for_scenario(scenario)
    ranges = [squared_distance_range(scenario, m) for m in range(scenario.n_users)]
    inner = [tol.inner_tol(r) for r in ranges]

    def feasible_at(t: float):
        out = Interval(0.0, scenario.dx)
        bounds = []
        for m in range(scenario.n_users):
            bound = invert_ccdf(scenario.channels[m], t, spec.epsilons[m], ranges[m], inner[m])
            if bound is None:
                return Interval.make_empty(), None
            bounds.append(bound)
            out = out.intersect(_interval_from_bound(scenario, m, bound))
            if out.empty:
                return out, None
        return out, tuple(bounds)

    t_hi = 2.0 * max(
        scenario.channels[m].rho * scenario.channels[m].eta / ranges[m].y_min
        for m in range(scenario.n_users)
    )
    for _ in range(_BRACKET_DOUBLINGS):
        if feasible_at(t_hi)[0].empty:
            break
        t_hi *= 2.0
    else:
        raise SolverAnomaly("could not bracket an infeasible threshold")

    t_lo, t_hi, interval, bounds, iters = _bisect_threshold(feasible_at, t_hi, tol)
    x_star = _argmax_quasiconcave(
        lambda x: max_threshold_at(scenario, spec, x), interval.lo, interval.hi
    )
    return Solution(
        t_star=max_threshold_at(scenario, spec, x_star),
        x_star=x_star,
        feasible=interval,
        outer_iterations=iters,
        per_user_bounds=bounds,
        meta={"bracket_lo": t_lo, "bracket_hi": t_hi},
    )


def fixed_antenna_outage_baseline(scenario: Scenario, spec: OutageSpec) -> Solution:
    """Best threshold attainable with the antenna fixed at dx/2."""
    x_fix = 0.5 * scenario.dx
    return Solution(
        t_star=max_threshold_at(scenario, spec, x_fix),
        x_star=x_fix,
        feasible=Interval(x_fix, x_fix),
        outer_iterations=0,
        per_user_bounds=None,
    )

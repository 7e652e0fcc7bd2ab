"""Monte-Carlo simulator of the composite channel and brute-force oracles.

The sampler draws the channel exactly as modeled: a Bernoulli LoS gate
with success probability exp(-beta r^2), a deterministic LoS phasor of
magnitude sqrt(eta)/r and phase 2 pi r / lambda + 2 pi x_pin / lambda_g,
and an aggregate complex-Gaussian NLoS term with per-component variance
mu^2 / (2 r^2). Estimates are reproducible: batch i uses the Philox
counter-based generator seeded by SeedSequence(seed, spawn_key=(i,)), and
per-batch partials are reduced with numpy's pairwise summation in batch
order, so scheduling cannot change results.

The grid searches are the independent optimality oracles for both
solvers; they evaluate the analytic objectives exhaustively and report
the discretization slack alongside the best point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .maxmin import Interval, Solution
from .model import ChannelParams, Scenario, squared_distance_range
from .outage import OutageSpec, _threshold_root
from .special import ccdf_inst_snr_batch


@dataclass(frozen=True)
class McConfig:
    """Sample budget, reproducibility seed, and accumulation block size."""

    samples: int = 1_000_000
    seed: int = 0
    batch: int = 250_000

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean (or probability) with its standard error."""

    mean: float
    std_error: float
    samples: int


def _batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(batch_index,))
    return np.random.Generator(np.random.Philox(seq))


def _channel_constants(params: ChannelParams, r_sq: float, x_pin: float):
    r = math.sqrt(r_sq)
    p_los = math.exp(-params.beta * r_sq)
    los_amp = math.sqrt(params.eta) / r
    nlos_scale = math.sqrt(0.5 * params.mu_sq) / r
    phase = 2.0 * math.pi * r / params.carrier_wavelength
    phase += 2.0 * math.pi * x_pin / params.guided_wavelength
    return p_los, los_amp, nlos_scale, math.cos(phase), math.sin(phase)


def _draw_snr(params, r_sq, rng, n, x_pin, rho):
    p_los, los_amp, nlos_scale, cos_ph, sin_ph = _channel_constants(params, r_sq, x_pin)
    u = rng.random(n)
    z_re = rng.standard_normal(n)
    z_im = rng.standard_normal(n)
    return kernels.snr_samples(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho)


def sample_channel_power(params: ChannelParams, r_sq: float, rng: np.random.Generator,
                         size: int | None = None, x_pin: float = 0.0):
    """Draw |h|^2 realizations of the composite channel at squared distance r_sq."""
    if not r_sq > 0.0:
        raise ValueError(f"squared distance must be positive, got {r_sq}")
    n = 1 if size is None else int(size)
    values = _draw_snr(params, r_sq, rng, n, x_pin, rho=1.0)
    return float(values[0]) if size is None else values


def _batches(cfg: McConfig):
    done = 0
    index = 0
    while done < cfg.samples:
        n = min(cfg.batch, cfg.samples - done)
        yield index, n
        done += n
        index += 1


def estimate_avg_snr(params: ChannelParams, r_sq: float, cfg: McConfig,
                     x_pin: float = 0.0) -> McEstimate:
    """Sample mean of the instantaneous SNR rho*|h|^2 with standard error."""
    sums, sq_sums = [], []
    for index, n in _batches(cfg):
        values = _draw_snr(params, r_sq, _batch_rng(cfg.seed, index), n, x_pin, params.rho)
        sums.append(np.sum(values))
        sq_sums.append(np.sum(values * values))
    total = float(np.sum(np.asarray(sums)))
    total_sq = float(np.sum(np.asarray(sq_sums)))
    n = cfg.samples
    mean = total / n
    if n > 1:
        var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
        std_error = math.sqrt(var / n)
    else:
        std_error = 0.0
    return McEstimate(mean=mean, std_error=std_error, samples=n)


def _binomial_std_error(successes: int, n: int) -> float:
    # +1/2 continuity floor keeps the error bar positive at 0 or n successes
    p = (successes + 0.5) / (n + 1.0)
    return math.sqrt(p * (1.0 - p) / n)


def estimate_ccdf(params: ChannelParams, r_sq: float, t: float, cfg: McConfig,
                  x_pin: float = 0.0) -> McEstimate:
    """Empirical P[rho*|h|^2 >= t] with a binomial standard error."""
    if t < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    hits = 0
    for index, n in _batches(cfg):
        values = _draw_snr(params, r_sq, _batch_rng(cfg.seed, index), n, x_pin, params.rho)
        hits += int(np.count_nonzero(values >= t))
    return McEstimate(
        mean=hits / cfg.samples,
        std_error=_binomial_std_error(hits, cfg.samples),
        samples=cfg.samples,
    )


def estimate_ccdf_curve(params: ChannelParams, r_sq: float, thresholds, cfg: McConfig,
                        x_pin: float = 0.0) -> list[McEstimate]:
    """estimate_ccdf across many thresholds reusing one set of draws."""
    thresholds = np.asarray(thresholds, dtype=float)
    hits = np.zeros(thresholds.size, dtype=np.int64)
    for index, n in _batches(cfg):
        values = _draw_snr(params, r_sq, _batch_rng(cfg.seed, index), n, x_pin, params.rho)
        values.sort()
        hits += n - np.searchsorted(values, thresholds, side="left")
    return [
        McEstimate(mean=int(k) / cfg.samples,
                   std_error=_binomial_std_error(int(k), cfg.samples),
                   samples=cfg.samples)
        for k in hits
    ]


def _user_grid_snr(scenario: Scenario, m: int, xs: np.ndarray) -> np.ndarray:
    params = scenario.channels[m]
    y = (scenario.users[m].x - xs) ** 2 + scenario.c_const(m)
    return params.rho * (params.eta * np.exp(-params.beta * y) + params.mu_sq) / y


def grid_search_maxmin(scenario: Scenario, grid_points: int) -> Solution:
    """Exhaustive max-min average SNR over a uniform position grid.

    meta["t_slack"] bounds the gap to the continuous optimum: half the
    grid spacing times the largest objective slope over the grid.
    """
    if grid_points < 2:
        raise ValueError(f"grid needs at least 2 points, got {grid_points}")
    xs = np.linspace(0.0, scenario.dx, grid_points)
    worst = np.full(xs.shape, np.inf)
    max_slope = 0.0
    for m in range(scenario.n_users):
        params = scenario.channels[m]
        y = (scenario.users[m].x - xs) ** 2 + scenario.c_const(m)
        np.minimum(worst, _user_grid_snr(scenario, m, xs), out=worst)
        # |dGamma/dx| = |f'(y)| * 2|x - x_m|
        f_prime = params.rho * (params.eta * np.exp(-params.beta * y) * (params.beta * y + 1.0)
                                + params.mu_sq) / (y * y)
        max_slope = max(max_slope, float(np.max(f_prime * 2.0 * np.abs(scenario.users[m].x - xs))))
    best = int(np.argmax(worst))
    spacing = scenario.dx / (grid_points - 1)
    return Solution(
        t_star=float(worst[best]),
        x_star=float(xs[best]),
        feasible=Interval(float(xs[best]), float(xs[best])),
        outer_iterations=0,
        per_user_bounds=None,
        meta={"t_slack": 0.5 * spacing * max_slope, "grid_points": grid_points},
    )


def default_threshold_ceiling(scenario: Scenario) -> float:
    """Upper end of the threshold search: past the LoS-limited drop."""
    return 2.0 * max(
        scenario.channels[m].rho * scenario.channels[m].eta
        / squared_distance_range(scenario, m).y_min
        for m in range(scenario.n_users)
    )


def outage_grid_ceiling(scenario: Scenario, spec: OutageSpec) -> float:
    """Tight solver-independent cap on the outage optimum.

    By weak duality, max_x min_m g_m(x) <= min_m max_x g_m(x); the right
    side is each user's best-case threshold at its own minimum distance,
    computed by a scalar root on t. Gridding [0, cap] keeps the t-grid
    resolution commensurate with the optimum.
    """
    spec = spec.for_scenario(scenario)
    cap = math.inf
    for m in range(scenario.n_users):
        params = scenario.channels[m]
        y = squared_distance_range(scenario, m).y_min
        seed = 2.0 * params.rho * params.eta / y
        cap = min(cap, _threshold_root(params, y, spec.epsilons[m], seed))
    return cap


def grid_search_outage(scenario: Scenario, spec: OutageSpec, grid_points: int,
                       t_grid) -> Solution:
    """Exhaustive outage-threshold maximization over position x t grids.

    t_grid is either a point count (linspace from 0 to
    outage_grid_ceiling) or an explicit increasing array starting at 0.
    Per position, the largest feasible t-grid index is found by a
    vectorized binary search, valid because the CCDF is nonincreasing
    in t.
    """
    if grid_points < 2:
        raise ValueError(f"grid needs at least 2 points, got {grid_points}")
    spec = spec.for_scenario(scenario)
    if np.isscalar(t_grid):
        if int(t_grid) < 2:
            raise ValueError(f"t grid needs at least 2 points, got {t_grid}")
        t_grid = np.linspace(0.0, outage_grid_ceiling(scenario, spec), int(t_grid))
    else:
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.size < 2:
            raise ValueError("t grid needs at least 2 points")
        if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
            raise ValueError("t grid must increase from 0")
    xs = np.linspace(0.0, scenario.dx, grid_points)
    nt = t_grid.size
    k_best = np.full(xs.shape, nt - 1, dtype=np.int64)
    for m in range(scenario.n_users):
        params = scenario.channels[m]
        target = 1.0 - spec.epsilons[m]
        y = (scenario.users[m].x - xs) ** 2 + scenario.c_const(m)
        k_lo = np.zeros(xs.size, dtype=np.int64)  # t_grid[0] = 0 always feasible
        k_hi = np.full(xs.size, nt - 1, dtype=np.int64)
        top_ok = ccdf_inst_snr_batch(params, y, np.full(xs.size, t_grid[-1])) >= target
        k_lo[top_ok] = nt - 1
        while True:
            active = k_lo < k_hi
            if not np.any(active):
                break
            mid = (k_lo[active] + k_hi[active] + 1) // 2
            ok = ccdf_inst_snr_batch(params, y[active], t_grid[mid]) >= target
            lo, hi = k_lo[active], k_hi[active]
            lo[ok] = mid[ok]
            hi[~ok] = mid[~ok] - 1
            k_lo[active] = lo
            k_hi[active] = hi
        np.minimum(k_best, k_lo, out=k_best)
    best = int(np.argmax(t_grid[k_best]))
    return Solution(
        t_star=float(t_grid[k_best[best]]),
        x_star=float(xs[best]),
        feasible=Interval(float(xs[best]), float(xs[best])),
        outer_iterations=0,
        per_user_bounds=None,
        meta={
            "t_spacing": float(np.max(np.diff(t_grid))),
            "x_spacing": scenario.dx / (grid_points - 1),
            "grid_points": grid_points,
            "t_points": nt,
        },
    )

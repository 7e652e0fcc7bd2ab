"""pinchopt: globally optimal pinching-antenna placement.

Places a single waveguide-mounted radiating element for multiuser
downlink under a probabilistic LoS / random NLoS channel, maximizing
either the worst-user average SNR or an outage-guaranteed SNR threshold,
both via nested-interval bisection with Monte-Carlo cross-validation.
"""

__version__ = "0.1.0"

from .kernels import BACKEND, HAS_NUMBA
from .maxmin import (
    BoundaryRegime,
    InfeasibleThreshold,
    Interval,
    SolverAnomaly,
    SolverTolerances,
    Solution,
    UnsupportedScenario,
    feasibility_avg,
    fixed_antenna_baseline,
    invert_f,
    min_avg_snr,
    solve_maxmin,
    two_user_closed_form,
    user_interval_avg,
)
from .model import (
    ChannelParams,
    InvalidScenario,
    Scenario,
    SquaredDistanceRange,
    UserPosition,
    avg_snr,
    dbm_to_linear,
    distance_squared,
    eta_from_carrier,
    f_scalar,
    los_probability,
    squared_distance_range,
)
from .montecarlo import (
    McConfig,
    McEstimate,
    estimate_avg_snr,
    estimate_ccdf,
    estimate_ccdf_curve,
    grid_search_maxmin,
    grid_search_outage,
    sample_channel_power,
)
from .outage import (
    OutageSpec,
    feasibility_outage,
    fixed_antenna_outage_baseline,
    invert_ccdf,
    max_threshold_at,
    solve_outage,
    user_interval_outage,
)
from .scenario_io import (
    ScenarioBundle,
    ScenarioFormatError,
    load_scenario,
    parse_scenario_dict,
    serialize_scenario,
)
from .special import MarcumArgs, bessel_i0_scaled, ccdf_inst_snr, ccdf_inst_snr_batch, marcum_q1

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "BoundaryRegime",
    "ChannelParams",
    "InfeasibleThreshold",
    "Interval",
    "InvalidScenario",
    "MarcumArgs",
    "McConfig",
    "McEstimate",
    "OutageSpec",
    "Scenario",
    "ScenarioBundle",
    "ScenarioFormatError",
    "SolverAnomaly",
    "SolverTolerances",
    "Solution",
    "SquaredDistanceRange",
    "UnsupportedScenario",
    "UserPosition",
    "avg_snr",
    "bessel_i0_scaled",
    "ccdf_inst_snr",
    "ccdf_inst_snr_batch",
    "dbm_to_linear",
    "distance_squared",
    "estimate_avg_snr",
    "estimate_ccdf",
    "estimate_ccdf_curve",
    "eta_from_carrier",
    "f_scalar",
    "feasibility_avg",
    "feasibility_outage",
    "fixed_antenna_baseline",
    "fixed_antenna_outage_baseline",
    "grid_search_maxmin",
    "grid_search_outage",
    "invert_ccdf",
    "invert_f",
    "load_scenario",
    "los_probability",
    "marcum_q1",
    "max_threshold_at",
    "min_avg_snr",
    "parse_scenario_dict",
    "sample_channel_power",
    "serialize_scenario",
    "solve_maxmin",
    "solve_outage",
    "squared_distance_range",
    "two_user_closed_form",
    "user_interval_avg",
    "user_interval_outage",
]

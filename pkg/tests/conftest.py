import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # tests/oracles.py

from pinchopt import ChannelParams, Scenario, UserPosition, eta_from_carrier
from pinchopt.montecarlo import McConfig, estimate_avg_snr

ETA_28GHZ = eta_from_carrier(28e9)
LAMBDA_28GHZ = 299_792_458.0 / 28e9


def make_params(beta=0.01, mu_sq=1e-9, rho=1e13, eta=ETA_28GHZ) -> ChannelParams:
    """Reference-setup channel constants (28 GHz, 40 dBm over -90 dBm noise)."""
    return ChannelParams(
        beta=beta,
        eta=eta,
        mu_sq=mu_sq,
        rho=rho,
        guided_wavelength=LAMBDA_28GHZ / 1.4,
        carrier_wavelength=LAMBDA_28GHZ,
    )


def make_scenario(user_xy, dx=30.0, dy=10.0, dv=10.0, **param_kwargs) -> Scenario:
    users = tuple(UserPosition(float(x), float(y)) for x, y in user_xy)
    params = make_params(**param_kwargs)
    return Scenario(dx=dx, dy=dy, dv=dv, users=users, channels=(params,) * len(users))


def random_scenario(rng: np.random.Generator, n_users: int, dx=30.0, dy=10.0, dv=10.0,
                    beta=None) -> Scenario:
    xs = rng.uniform(0.0, dx, n_users)
    ys = rng.uniform(-0.5 * dy, 0.5 * dy, n_users)
    if beta is None:
        beta = float(rng.uniform(1e-3, 1e-2))
    return make_scenario(zip(xs, ys), dx=dx, dy=dy, dv=dv, beta=beta)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # One tiny estimate up front so numba JIT time is paid before any
    # runtime-budgeted acceptance check.
    estimate_avg_snr(make_params(), 150.0, McConfig(samples=256, seed=0))

"""Modified Bessel I0, first-order Marcum Q, and the instantaneous-SNR CCDF.

The instantaneous SNR rho*|h|^2 of the composite channel mixes a Rician
branch (LoS present) and an exponential branch (LoS blocked):

    P[snr >= t] = e^{-beta r^2} Q1(a, b) + (1 - e^{-beta r^2}) e^{-t r^2/(rho mu^2)}

with a = sqrt(2 eta)/mu and b = sqrt(2) r sqrt(t/rho)/mu. For fixed t > 0
the mixture is strictly decreasing in r^2, which is what lets the outage
solver turn each reliability constraint into a distance bound.

The numeric evaluation lives in ``kernels`` (numba/numpy backends); this
module owns validation and the channel-facing formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ChannelParams


def bessel_i0_scaled(x: float) -> float:
    """Exponentially scaled modified Bessel function e^{-x} I0(x), x >= 0.

    Taylor series sum_k (x^2/4)^k / (k!)^2 up to x = 15, then the
    asymptotic expansion I0(x) ~ e^x/sqrt(2 pi x) sum_k a_k x^{-k} with
    a_k = ((2k-1)!!)^2 / (8^k k!), truncated at its smallest term.
    """
    if x < 0.0:
        raise ValueError(f"bessel_i0_scaled needs x >= 0, got {x}")
    return kernels.i0_scaled(x)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q function Q1(a, b) in [0, 1].

    Q1(a, b) = int_b^inf x exp(-(x^2+a^2)/2) I0(ax) dx; strictly
    increasing in a, strictly decreasing in b. Q1(a, 0) = 1 and
    Q1(0, b) = exp(-b^2/2) exactly.
    """
    if a < 0.0 or b < 0.0:
        raise ValueError(f"marcum_q1 needs a, b >= 0, got a={a}, b={b}")
    return kernels.marcum_q1_scalar(a, b)


@dataclass(frozen=True)
class MarcumArgs:
    """Rician-branch arguments: noncentrality a and normalized threshold b."""

    a: float
    b: float

    def __post_init__(self):
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError(f"MarcumArgs must be nonnegative, got a={self.a}, b={self.b}")

    @classmethod
    def for_threshold(cls, params: ChannelParams, r_sq: float, t: float) -> "MarcumArgs":
        """a = sqrt(2 eta)/mu, b = sqrt(2) r sqrt(t/rho)/mu for threshold t."""
        mu = math.sqrt(params.mu_sq)
        a = math.sqrt(2.0 * params.eta) / mu
        b = math.sqrt(2.0 * r_sq * t / params.rho) / mu
        return cls(a=a, b=b)


def ccdf_inst_snr(params: ChannelParams, r_sq: float, t: float) -> float:
    """P[instantaneous SNR >= t] at squared distance r_sq; in [0, 1].

    LoS/NLoS mixture: e^{-beta r^2} Q1(a,b) + (1-e^{-beta r^2}) *
    exp(-t r^2 / (rho mu^2)). Clamped to [0, 1] to absorb the 1-ulp
    series residue.
    """
    if t < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {t}")
    if not r_sq > 0.0:
        raise ValueError(f"squared distance must be positive, got {r_sq}")
    if t == 0.0:
        return 1.0  # SNR is almost surely nonnegative
    args = MarcumArgs.for_threshold(params, r_sq, t)
    p_los = math.exp(-params.beta * r_sq)
    nlos_tail = math.exp(-t * r_sq / (params.rho * params.mu_sq))
    value = p_los * kernels.marcum_q1_scalar(args.a, args.b) + (1.0 - p_los) * nlos_tail
    return min(max(value, 0.0), 1.0)


def ccdf_inst_snr_batch(params: ChannelParams, r_sq, t) -> np.ndarray:
    """Vectorized ccdf_inst_snr over broadcastable arrays r_sq > 0, t >= 0."""
    r_sq, t = np.broadcast_arrays(np.asarray(r_sq, float), np.asarray(t, float))
    mu = math.sqrt(params.mu_sq)
    a = math.sqrt(2.0 * params.eta) / mu
    b = np.sqrt(2.0 * r_sq * t / params.rho) / mu
    q1 = kernels.marcum_q1_batch(np.full_like(b, a), b)
    p_los = np.exp(-params.beta * r_sq)
    with np.errstate(under="ignore"):
        nlos_tail = np.exp(-t * r_sq / (params.rho * params.mu_sq))
    value = np.clip(p_los * q1 + (1.0 - p_los) * nlos_tail, 0.0, 1.0)
    return np.where(t == 0.0, 1.0, value)

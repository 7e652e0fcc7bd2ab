"""Hot numeric kernels: numba @njit with a pure-numpy fallback.

Two inner loops dominate the package's runtime and live here in both
flavors: the Monte-Carlo channel-power map (millions of samples per
estimate) and the Marcum-Q evaluation (tens of millions of calls inside
the solvers and grid oracles).

The backend is fixed once at import from the PINCHOPT_BACKEND environment
variable:

    numba   require numba (ImportError if missing)
    numpy   force the pure-numpy fallback
    auto    numba when importable, numpy otherwise (default)

``benchmarks/bench_backends.py`` times one against the other. Results are
deterministic within a backend; across backends they may differ in the
last few ulps (different exp/cos code paths).

Marcum-Q evaluation strategy: the Poisson-mixture series runs in linear
space while a*b <= 500 and both exp(-a^2/2), exp(-b^2/2) stay
representable; past that the scaled-Bessel series with a backward (Miller)
recurrence takes over, except that for |a - b| >= 14 the function has
already saturated at 0 or 1 to far below double precision (the remainder
is bounded by e^{-(a-b)^2/2} I0_scaled(ab)/(1-min/max) < 1e-40).
"""

from __future__ import annotations

import math
import os

import numpy as np

# Poisson-mixture truncation: stop once the remaining Poisson(a^2/2) tail
# mass (an upper bound on the series remainder) is below this.
SERIES_TAIL = 1e-14
MAX_TERMS = 30_000
LINEAR_AB_LIMIT = 500.0
EXP_ARG_LIMIT = 700.0
SATURATION_GAP = 14.0


def _i0_scaled(x: float) -> float:
    """e^{-x} I0(x) for x >= 0: Taylor series to 15, asymptotic beyond."""
    if x <= 15.0:
        q = 0.25 * x * x
        term = 1.0
        s = 1.0
        k = 0
        while term > 1e-18 * s:
            k += 1
            term *= q / (k * k)
            s += term
        return math.exp(-x) * s
    s = 1.0
    term = 1.0
    for k in range(1, 40):
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        if nxt >= term:  # divergent tail reached
            break
        term = nxt
        s += term
        if term < 1e-17 * s:
            break
    return s / math.sqrt(2.0 * math.pi * x)


def _marcum_series(a: float, b: float) -> float:
    """Q1(a,b) = sum_k e^{-u} u^k/k! * P[Pois(v) <= k], u=a^2/2, v=b^2/2."""
    u = 0.5 * a * a
    v = 0.5 * b * b
    p = math.exp(-u)   # Poisson(u) pmf at k
    w = math.exp(-v)   # Poisson(v) pmf at j = k
    cdf = w            # P[Pois(v) <= k]
    total = p * cdf
    cum = p
    k = 0
    while 1.0 - cum > SERIES_TAIL and k < MAX_TERMS:
        k += 1
        p *= u / k
        w *= v / k
        cdf += w
        total += p * cdf
        cum += p
    if total < 0.0:
        return 0.0
    if total > 1.0:
        return 1.0
    return total


def _marcum_bessel(a: float, b: float) -> float:
    """Scaled-Bessel form with Miller backward recurrence (a, b > 0).

    a <= b: Q1 = e^{-(a-b)^2/2} sum_{k>=0} (a/b)^k e^{-ab} I_k(ab)
    a >  b: Q1 = 1 - e^{-(a-b)^2/2} sum_{k>=1} (b/a)^k e^{-ab} I_k(ab)
    """
    x = a * b
    k_max = int(8.0 * math.sqrt(x)) + 60
    start = k_max + int(2.0 * math.sqrt(max(x, 40.0))) + 40
    ratios = np.empty(k_max + 1)  # ratios[k] = I_{k+1}(x) / I_k(x)
    r = 0.0
    for k in range(start, 0, -1):
        r = 1.0 / (2.0 * k / x + r)
        if k - 1 <= k_max:
            ratios[k - 1] = r
    pref = math.exp(-0.5 * (a - b) * (a - b))
    if a <= b:
        ratio = a / b
        ik = _i0_scaled(x)
        rk = 1.0
        s = 0.0
        for k in range(k_max + 1):
            term = rk * ik
            s += term
            if k > 2 and term < 1e-17 * s:
                break
            rk *= ratio
            ik *= ratios[k]
        out = pref * s
        return 1.0 if out > 1.0 else out
    ratio = b / a
    ik = _i0_scaled(x) * ratios[0]
    rk = ratio
    s = 0.0
    for k in range(1, k_max + 1):
        term = rk * ik
        s += term
        if k > 2 and term < 1e-17 * s:
            break
        rk *= ratio
        ik *= ratios[k]
    out = 1.0 - pref * s
    if out < 0.0:
        return 0.0
    if out > 1.0:
        return 1.0
    return out


def _marcum_q1_scalar(a: float, b: float) -> float:
    """Full Q1 dispatch; assumes a, b >= 0 (validated by the public API)."""
    if b == 0.0:
        return 1.0
    if a == 0.0:
        v = 0.5 * b * b
        return math.exp(-v) if v < EXP_ARG_LIMIT else 0.0
    if a * b <= LINEAR_AB_LIMIT and 0.5 * a * a < EXP_ARG_LIMIT and 0.5 * b * b < EXP_ARG_LIMIT:
        return _marcum_series(a, b)
    if a - b >= SATURATION_GAP:
        return 1.0
    if b - a >= SATURATION_GAP:
        return 0.0
    return _marcum_bessel(a, b)


def _snr_samples_numpy(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho):
    """Instantaneous SNR rho*|h|^2 from pre-drawn uniforms and normals.

    gamma = 1{u < p_los} gates a deterministic LoS phasor of magnitude
    los_amp and phase -phi; the NLoS term is nlos_scale*(z_re + j z_im).
    """
    gated = np.where(u < p_los, los_amp, 0.0)
    re = gated * cos_ph + nlos_scale * z_re
    im = nlos_scale * z_im - gated * sin_ph
    return rho * (re * re + im * im)


def _marcum_series_numpy(a, b):
    """Vectorized Poisson-mixture series over linear-region lanes."""
    u = 0.5 * a * a
    v = 0.5 * b * b
    p = np.exp(-u)
    w = np.exp(-v)
    cdf = w.copy()
    total = p * cdf
    cum = p.copy()
    k = 0
    while k < MAX_TERMS:
        if np.max(1.0 - cum) <= SERIES_TAIL:
            break
        k += 1
        p *= u / k
        w *= v / k
        cdf += w
        total += p * cdf
        cum += p
    return np.clip(total, 0.0, 1.0)


def _marcum_batch_numpy(a, b):
    out = np.empty_like(a)
    linear = (a * b <= LINEAR_AB_LIMIT) & (0.5 * a * a < EXP_ARG_LIMIT) \
        & (0.5 * b * b < EXP_ARG_LIMIT)
    out[linear] = _marcum_series_numpy(a[linear], b[linear])
    hard = ~linear
    if np.any(hard):
        sat_one = hard & (a - b >= SATURATION_GAP)
        sat_zero = hard & (b - a >= SATURATION_GAP)
        out[sat_one] = 1.0
        out[sat_zero] = 0.0
        band = hard & ~sat_one & ~sat_zero
        if np.any(band):
            out[band] = [_marcum_q1_scalar(float(ai), float(bi))
                         for ai, bi in zip(a[band], b[band])]
    return out


_env = os.environ.get("PINCHOPT_BACKEND", "auto").strip().lower()
if _env not in ("auto", "numba", "numpy", ""):
    raise ValueError(
        f"PINCHOPT_BACKEND={_env!r} not understood; use 'numba', 'numpy' or 'auto'"
    )

_numba = None
if _env in ("auto", "numba", ""):
    try:
        import numba as _numba
    except ImportError:
        if _env == "numba":
            raise
        _numba = None

HAS_NUMBA = _numba is not None
BACKEND = "numba" if HAS_NUMBA else "numpy"

# Plain-python implementations double as numba sources: rebinding the module
# globals before first call makes the jitted functions resolve each other.
_i0_scaled_py = _i0_scaled
_marcum_q1_scalar_py = _marcum_q1_scalar

if HAS_NUMBA:
    _i0_scaled = _numba.njit(cache=True)(_i0_scaled)
    _marcum_series = _numba.njit(cache=True)(_marcum_series)
    _marcum_bessel = _numba.njit(cache=True)(_marcum_bessel)
    _marcum_q1_scalar_nb = _numba.njit(cache=True)(_marcum_q1_scalar_py)
    _marcum_q1_scalar = _marcum_q1_scalar_nb

    @_numba.njit(cache=True)
    def _marcum_batch_nb(a, b):
        out = np.empty_like(a)
        for i in range(a.shape[0]):
            out[i] = _marcum_q1_scalar_nb(a[i], b[i])
        return out

    @_numba.njit(cache=True)
    def _snr_samples_nb(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho):
        n = u.shape[0]
        out = np.empty(n)
        for i in range(n):
            if u[i] < p_los:
                re = los_amp * cos_ph + nlos_scale * z_re[i]
                im = nlos_scale * z_im[i] - los_amp * sin_ph
            else:
                re = nlos_scale * z_re[i]
                im = nlos_scale * z_im[i]
            out[i] = rho * (re * re + im * im)
        return out


def snr_samples(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho):
    """Map pre-drawn (uniform, normal, normal) samples to SNR values."""
    if HAS_NUMBA:
        return _snr_samples_nb(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho)
    return _snr_samples_numpy(u, z_re, z_im, p_los, los_amp, nlos_scale, cos_ph, sin_ph, rho)


def marcum_q1_batch(a, b):
    """Batched Q1 over float64 arrays of any shape."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    shape = np.broadcast_shapes(a.shape, b.shape)
    a = np.broadcast_to(a, shape).ravel()
    b = np.broadcast_to(b, shape).ravel()
    if HAS_NUMBA:
        out = _marcum_batch_nb(a, b)
    else:
        out = _marcum_batch_numpy(a, b)
    return out.reshape(shape)


def marcum_q1_scalar(a: float, b: float) -> float:
    """Scalar Q1 (full dispatch; arguments assumed nonnegative)."""
    return _marcum_q1_scalar(a, b)


def i0_scaled(x: float) -> float:
    """Scalar e^{-x} I0(x) (argument assumed nonnegative)."""
    return _i0_scaled(x)

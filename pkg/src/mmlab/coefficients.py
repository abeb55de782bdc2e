"""Scalar distortion coefficients and the smooth absolute value.

The comparison functions are defined branch-wise in the sign of the curvature
parameter ``kappa``; the closed infinite branch starts at ``omega(kappa)``.
All functions are pure and have vectorised ``*_vals`` variants used by the
quadrature code.
"""

from __future__ import annotations

import math

import numpy as np

from .core import EXT_INF, ExtReal
from .errors import InvalidDimension, ValidationError

__all__ = [
    "omega",
    "s_kappa",
    "sigma",
    "sigma_vals",
    "sigma_pair",
    "sigma_pair_vals",
    "sigma_range_sup",
    "tau",
    "tau_vals",
    "tau_pair",
    "tau_pair_vals",
    "tau_sup",
    "f_softabs",
]

_SERIES_Z = 1e-4  # below this |sqrt(|kappa|)*theta| a Taylor series is used


def omega(kappa: float) -> float:
    """Endpoint of the finite branch: pi/sqrt(kappa) for kappa > 0, else inf."""
    if kappa > 0:
        return math.pi / math.sqrt(kappa)
    return math.inf


def s_kappa(kappa: float, theta: float) -> float:
    """sin(sqrt(kappa) theta)/(sqrt(kappa) theta) with the kappa <= 0 branches.

    Continuous in theta with value 1 at theta = 0.
    """
    if theta < 0:
        raise ValidationError(f"theta must be nonnegative, got {theta}")
    if kappa == 0 or theta == 0.0:
        return 1.0
    z = math.sqrt(abs(kappa)) * theta
    if z < _SERIES_Z:
        z2 = z * z
        corr = z2 / 6.0 - z2 * z2 / 120.0
        return 1.0 - corr if kappa > 0 else 1.0 + z2 / 6.0 + z2 * z2 / 120.0
    if kappa > 0:
        return math.sin(z) / z
    return math.sinh(z) / z


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0,1], got {t}")
    return t


def _sin_ratio(t: float, z: np.ndarray) -> np.ndarray:
    # sin(t z)/sin(z) on z in (0, pi); equals sigma for kappa > 0
    return np.sin(t * z) / np.sin(z)


def _sinh_ratio(t: float, z: np.ndarray) -> np.ndarray:
    # sinh(t z)/sinh(z), stable for all z > 0 via expm1
    num = np.expm1(-2.0 * t * z)
    den = np.expm1(-2.0 * z)
    return np.exp((t - 1.0) * z) * (num / den)


def sigma_vals(kappa: float, t: float, thetas) -> np.ndarray:
    """Vectorised distortion ratio; ``inf`` on the closed branch."""
    t = _check_t(t)
    th = np.asarray(thetas, dtype=float)
    if np.any(th < 0):
        raise ValidationError("theta must be nonnegative")
    if kappa == 0:
        return np.full(th.shape, t, dtype=float)
    z = math.sqrt(abs(kappa)) * th
    out = np.full(th.shape, t, dtype=float)
    if kappa > 0:
        closed = z >= math.pi
        open_pos = ~closed & (z > 0)
        if np.any(open_pos):
            out[open_pos] = _sin_ratio(t, z[open_pos])
        out[closed] = math.inf
    else:
        pos = z > 0
        if np.any(pos):
            out[pos] = _sinh_ratio(t, z[pos])
    return out


def sigma(kappa: float, t: float, theta: float) -> ExtReal:
    """Distortion coefficient; ``ExtReal(inf)`` once theta reaches omega(kappa)."""
    v = float(sigma_vals(kappa, t, np.asarray([theta]))[0])
    return EXT_INF if math.isinf(v) else ExtReal(v)


def sigma_pair(kappa: float, t: float, theta: float, index: int) -> ExtReal:
    """Index-0 variant uses the reversed fraction 1 - t, index-1 uses t."""
    return sigma(kappa, (1.0 - t) if index == 0 else t, theta)


def sigma_pair_vals(kappa: float, t: float, thetas, index: int) -> np.ndarray:
    return sigma_vals(kappa, (1.0 - t) if index == 0 else t, thetas)


def sigma_range_sup(kappa: float, t: float, theta_lo: float, theta_hi: float) -> ExtReal:
    """Supremum of the ratio over a theta interval.

    The ratio is monotone on the finite branch (nonincreasing for kappa <= 0,
    nondecreasing for kappa > 0), so the supremum sits at an endpoint.
    """
    if theta_hi < theta_lo:
        raise ValidationError("empty theta range")
    if kappa > 0 and theta_hi >= omega(kappa):
        return EXT_INF
    return sigma(kappa, t, theta_lo if kappa <= 0 else theta_hi)


def tau_vals(K: float, N: float, t: float, thetas) -> np.ndarray:
    """Vectorised tau coefficient for dimension parameter N < 0."""
    if N >= 0:
        raise InvalidDimension(f"N must be negative, got {N}")
    t = _check_t(t)
    th = np.asarray(thetas, dtype=float)
    kappa = K / (N - 1.0)
    if t == 0.0:
        out = np.zeros(th.shape, dtype=float)
        if kappa > 0:
            out[math.sqrt(kappa) * th >= math.pi] = math.inf
        return out
    sig = sigma_vals(kappa, t, th)
    out = np.where(np.isinf(sig), math.inf, 0.0)
    finite = ~np.isinf(sig)
    # tau = t * (s(t theta)/s(theta))^{1-1/N} = t * (sigma/t)^{1-1/N}
    out[finite] = t * (sig[finite] / t) ** (1.0 - 1.0 / N)
    return out


def tau(K: float, N: float, t: float, theta: float) -> ExtReal:
    """Distortion coefficient with dimensional weighting, N < 0."""
    v = float(tau_vals(K, N, t, np.asarray([theta]))[0])
    return EXT_INF if math.isinf(v) else ExtReal(v)


def tau_pair(K: float, N: float, t: float, theta: float, index: int) -> ExtReal:
    return tau(K, N, (1.0 - t) if index == 0 else t, theta)


def tau_pair_vals(K: float, N: float, t: float, thetas, index: int) -> np.ndarray:
    return tau_vals(K, N, (1.0 - t) if index == 0 else t, thetas)


def tau_sup(K: float, N: float, t: float, theta_max: float) -> ExtReal:
    """Supremum of tau over theta in [0, theta_max].

    tau is monotone in theta on the finite branch: nonincreasing for K >= 0
    (so the supremum is t, attained at theta = 0) and nondecreasing for K < 0
    (supremum at theta_max, infinite once theta_max reaches the closed
    branch).  Monotonicity follows from the sign of
    (1 - t^2) s(t z) s(z) in the derivative of the ratio.
    """
    if N >= 0:
        raise InvalidDimension(f"N must be negative, got {N}")
    t = _check_t(t)
    if theta_max < 0:
        raise ValidationError("theta_max must be nonnegative")
    if K >= 0:
        return ExtReal(t)
    kappa = K / (N - 1.0)  # positive here
    if theta_max >= omega(kappa):
        return EXT_INF
    return tau(K, N, t, theta_max)


def f_softabs(a: float, x):
    """Smooth absolute value a^{-1} log(e^{ax} + e^{-ax}).

    Overflow-safe: evaluated as |x| + a^{-1} log(1 + e^{-2a|x|}).  Satisfies
    |x| < value <= |x| + a^{-1} log 2, is even and smooth.
    """
    if a <= 0:
        raise ValidationError(f"softness parameter must be positive, got {a}")
    ax = np.abs(np.asarray(x, dtype=float))
    out = ax + np.log1p(np.exp(-2.0 * a * ax)) / a
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out

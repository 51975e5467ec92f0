"""Complex log-Gamma on the principal branch.

Stirling series with upward recurrence.  The recurrence accumulates a sum of
principal logarithms rather than the log of a product, which keeps the result
on the branch that is real on the positive axis and continuous off the
negative real axis (same convention as ``scipy.special.loggamma``).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import PoleError

__all__ = ["log_gamma", "log_abs_gamma", "log_gamma_ratio", "complex_gamma", "is_gamma_pole"]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k (2k-1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

# Stirling is used directly only when |z| >= _RADIUS and Re z >= 0.
_RADIUS = 12.0
_POLE_RTOL = 8.0 * np.finfo(float).eps

# log((m-1)!) for m = 1..64, so small positive integers come out exact
_LOG_FACTORIAL = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, 64)))))


def is_gamma_pole(z):
    """Boolean mask: ``z`` within machine tolerance of 0, -1, -2, ..."""
    z = np.asarray(z, dtype=complex)
    nearest = np.round(z.real)
    tol = _POLE_RTOL * np.maximum(1.0, np.abs(z))
    return (nearest <= 0) & (np.abs(z - nearest) <= tol)


def _stirling(w):
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for coeff in reversed(_STIRLING):
        series = series * inv2 + coeff
    return (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv


def _log_gamma_array(z):
    z = np.asarray(z, dtype=complex)
    if np.any(is_gamma_pole(z)):
        bad = z[is_gamma_pole(z)].ravel()[0]
        raise PoleError(f"log_gamma: argument {bad} is a pole of Gamma")
    need = (np.abs(z) < _RADIUS) | (z.real < 0.0)
    shift = np.where(need, np.ceil(_RADIUS - z.real), 0.0).astype(np.int64)
    shift = np.maximum(shift, 0)
    acc = np.zeros_like(z)
    top = int(shift.max()) if shift.size else 0
    for k in range(top):
        active = shift > k
        acc[active] += np.log(z[active] + k)
    out = _stirling(z + shift) - acc
    integer = (z.imag == 0) & (z.real >= 1) & (z.real <= _LOG_FACTORIAL.size) & (z.real == np.round(z.real))
    if np.any(integer):
        out[integer] = _LOG_FACTORIAL[z.real[integer].astype(np.int64) - 1]
    return out


def log_abs_gamma(z):
    """``log|Gamma(z)|`` for a complex array, vectorised for bulk kernel work.

    Every entry is shifted by the same count, so the recurrence becomes a
    few complex products and one real log per block of eight factors.
    """
    z = np.asarray(z, dtype=complex)
    if z.size == 0:
        return np.zeros(z.shape)
    if np.any(is_gamma_pole(z)):
        raise PoleError("log_abs_gamma: argument on a pole of Gamma")
    shift = max(0, math.ceil(_RADIUS - float(z.real.min())))
    acc = np.zeros(z.shape)
    for start in range(0, shift, 8):
        prod = np.ones_like(z)
        for k in range(start, min(start + 8, shift)):
            prod *= z + k
        acc += np.log(np.abs(prod))
    return _stirling(z + shift).real - acc


def log_gamma(z):
    """Principal-branch ``log Gamma(z)`` for complex scalars or arrays.

    Raises PoleError at non-positive integers.  Scalars in give a Python
    complex out; arrays give a complex ndarray of the same shape.
    """
    if np.ndim(z) == 0:
        return complex(_log_gamma_array(np.array([z]))[0])
    return _log_gamma_array(z)


def log_gamma_ratio(z, shift):
    """``log Gamma(z + shift) - log Gamma(z)``.

    A positive integer shift goes through the recurrence
    ``log z + log(z+1) + ...``; anything else falls back to two log_gamma
    calls.  The two routes agree modulo 2*pi*i.
    """
    z = complex(z)
    if is_gamma_pole(z) or is_gamma_pole(z + shift):
        raise PoleError(f"log_gamma_ratio: pole at z={z}, shift={shift}")
    if float(shift) == int(shift) and int(shift) > 0:
        return sum(cmath.log(z + k) for k in range(int(shift)))
    return log_gamma(z + shift) - log_gamma(z)


def complex_gamma(z):
    return np.exp(log_gamma(z)) if np.ndim(z) else cmath.exp(log_gamma(z))

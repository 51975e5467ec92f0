"""Log-space evaluation of the Mellin-Barnes kernel K^(g)(gamma).

    K = prod_{i<n} [ prod_{j<=i, k<=i+1} G((g_ij - g_{i+1,k} + g)/2) G((g_{i+1,k} - g_ij + g)/2) ]
                   / [ prod_{r != s <= i} G((g_ir - g_is)/2) G((g_ir - g_is + 2g)/2) ]

with G = Gamma and the denominator running over ordered pairs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelZero, PoleError
from .gz import GzPattern, ShiftTuple, coeff_a, coeff_b
from .special import is_gamma_pole, log_abs_gamma, log_gamma

__all__ = [
    "KernelLogValue",
    "kernel_gamma_arguments",
    "log_kernel",
    "log_kernel_nodes",
    "log_kernel_contour",
    "verify_lemma4",
    "decay_envelope",
    "fit_log_envelope",
    "reduce_phase",
]


def reduce_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = math.remainder(phi, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class KernelLogValue:
    """log|K| and arg K; ``log_modulus == -inf`` marks a zero of K."""

    log_modulus: float
    phase: float

    @property
    def is_zero(self) -> bool:
        return self.log_modulus == -math.inf

    @property
    def log(self) -> complex:
        if self.is_zero:
            raise KernelZero("log of a vanishing kernel")
        return complex(self.log_modulus, self.phase)

    @property
    def value(self) -> complex:
        if self.is_zero:
            return 0j
        return cmath.exp(self.log)


def kernel_gamma_arguments(p: GzPattern, g):
    """Numerator and denominator Gamma arguments of K at ``p``."""
    n = p.n
    num, den = [], []
    for i in range(1, n):
        upper = p.row(i + 1)
        for a in p.row(i):
            for b in upper:
                num.append((a - b + g) / 2)
                num.append((b - a + g) / 2)
        row = p.row(i)
        for r in range(i):
            for s in range(i):
                if r != s:
                    u = row[r] - row[s]
                    den.append(u / 2)
                    den.append((u + 2 * g) / 2)
    return [complex(z) for z in num], [complex(z) for z in den]


def log_kernel(p: GzPattern, g, allow_zero: bool = False) -> KernelLogValue:
    """log K^(g) at the pattern ``p``.

    Numerator poles raise PoleError.  A denominator pole means K = 0; that
    raises KernelZero unless ``allow_zero`` is set, in which case the
    ``-inf`` marker is returned.
    """
    num, den = kernel_gamma_arguments(p, g)
    if num and np.any(is_gamma_pole(num)):
        raise PoleError("kernel numerator Gamma at a pole")
    if den and np.any(is_gamma_pole(den)):
        if allow_zero:
            return KernelLogValue(-math.inf, 0.0)
        raise KernelZero("kernel denominator Gamma at a pole")
    total = complex(np.sum(log_gamma(np.array(num)))) if num else 0j
    if den:
        total -= complex(np.sum(log_gamma(np.array(den))))
    return KernelLogValue(total.real, reduce_phase(total.imag))


def _variable_index(n: int):
    """Map (i, j), i < n, to a flat column index, row by row."""
    idx, col = {}, 0
    for i in range(1, n):
        for j in range(1, i + 1):
            idx[i, j] = col
            col += 1
    return idx


def log_kernel_nodes(gammas, lam, g):
    """Vectorised log K for many patterns.

    ``gammas`` has shape (N, n(n-1)/2), the free entries listed row by row;
    ``lam`` holds row n.  Zeros of K come back with real part ``-inf``.
    """
    lam = np.asarray(lam, dtype=complex)
    n = lam.size
    gammas = np.asarray(gammas, dtype=complex).reshape(-1, n * (n - 1) // 2)
    col = _variable_index(n)

    def entry(i, j):
        return lam[j - 1] if i == n else gammas[:, col[i, j]]

    out = np.zeros(gammas.shape[0], dtype=complex)
    for i in range(1, n):
        for j in range(1, i + 1):
            a = entry(i, j)
            for k in range(1, i + 2):
                u = a - entry(i + 1, k)
                out += log_gamma((u + g) / 2) + log_gamma((g - u) / 2)
        for r in range(1, i + 1):
            for s in range(1, i + 1):
                if r == s:
                    continue
                u = entry(i, r) - entry(i, s)
                zero = is_gamma_pole(u / 2) | is_gamma_pole(u / 2 + g)
                safe = np.where(zero, 1.0, u)
                term = log_gamma(safe / 2) + log_gamma(safe / 2 + g)
                out -= np.where(zero, 0.0, term)
                out[zero] = complex(-np.inf, 0.0)
    return out


def _log_abs_gamma_imag_sq(y):
    """log |Gamma(i y)|^2 = log(pi / (y sinh(pi y))), y != 0."""
    ay = np.abs(y)
    # log sinh(pi ay) = pi ay + log1p(-exp(-2 pi ay)) - log 2
    log_sinh = np.pi * ay + np.log(-np.expm1(-2 * np.pi * ay)) - math.log(2.0)
    return math.log(math.pi) - np.log(ay) - log_sinh


def log_kernel_contour(t, mu, g):
    """Real log K at contour points gamma = i t, lambda = i mu.

    ``t`` has shape (N, n(n-1)/2), entries row by row.  K is real and
    positive there, so only log|Gamma| is needed; same-row factors use the
    closed form of |Gamma(iy)|^2.  Coinciding same-row entries give -inf.
    """
    mu = np.asarray(mu, dtype=float)
    n = mu.size
    t = np.asarray(t, dtype=float).reshape(-1, n * (n - 1) // 2)
    col = _variable_index(n)

    def entry(i, j):
        return np.full(t.shape[0], mu[j - 1]) if i == n else t[:, col[i, j]]

    num = []
    den = []
    for i in range(1, n):
        for j in range(1, i + 1):
            a = entry(i, j)
            num.extend(a - entry(i + 1, k) for k in range(1, i + 2))
            den.extend(a - entry(i, s) for s in range(j + 1, i + 1))
    out = 2.0 * log_abs_gamma((g + 1j * np.stack(num)) / 2).sum(axis=0)
    if den:
        y = np.stack(den) / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            dlog = _log_abs_gamma_imag_sq(y) + 2.0 * log_abs_gamma(g + 1j * y)
        dlog = np.where(y == 0, np.inf, dlog)
        out = out - dlog.sum(axis=0)
    return out


def verify_lemma4(i: int, j: int, k: ShiftTuple, p: GzPattern, g) -> float:
    """|log(a(p') K(p')) - log(b(p) K(p))| mod 2*pi*i, p' = p + 2 along k."""
    shifted = p.shifted(k, 2)
    lhs = cmath.log(complex(coeff_a(i, j, k, shifted, g))) + log_kernel(shifted, g).log
    rhs = cmath.log(complex(coeff_b(i, j, k, p, g))) + log_kernel(p, g).log
    d = lhs - rhs
    return abs(complex(d.real, reduce_phase(d.imag)))


def decay_envelope(p: GzPattern, g) -> float:
    """log|K| + (pi/n) sum_{i<n} |gamma_ij|."""
    n = p.n
    if n == 1:
        return 0.0
    lk = log_kernel(p, g, allow_zero=True)
    mass = sum(abs(complex(v)) for row in p.rows[:-1] for v in row)
    return lk.log_modulus + math.pi / n * mass


def fit_log_envelope(t, envelope):
    """Constants (c0, c1) with envelope <= c0 + c1 log(1 + |t|) at every sample.

    c1 comes from a least-squares fit; c0 is then raised until the bound
    holds at all samples.  Samples at zeros of K (envelope -inf) satisfy any
    bound and are left out of the fit.
    """
    t = np.asarray(t, dtype=float)
    env = np.asarray(envelope, dtype=float)
    keep = np.isfinite(env)
    t, env = t[keep], env[keep]
    basis = np.log1p(np.abs(t))
    design = np.stack([np.ones_like(basis), basis], axis=1)
    (c0, c1), *_ = np.linalg.lstsq(design, env, rcond=None)
    c0 += max(0.0, float(np.max(env - (c0 + c1 * basis))))
    return float(c0), float(c1)

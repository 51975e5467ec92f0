"""Independent ground truths for the quadrature.

* the n = 2 closed form, as a two-term 2F1 combination and as a Legendre P
  expression (P built from Q, Q from 2F1);
* a finite-difference Hamiltonian applicator for Psi and the gauge operator
  for Phi;
* the g = 1/2 comparison between the general kernel and the older
  spherical-function kernel with denominator prod Gamma(gamma_r - gamma_s).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import Divergence, SingularParameter, StencilTooWide
from .gz import GzPattern
from .kernel import log_kernel
from .special import complex_gamma, is_gamma_pole, log_gamma

__all__ = [
    "gauss_2f1",
    "legendre_q",
    "legendre_p",
    "sl2_phi",
    "phi_n2_closed",
    "n2_ode_residual",
    "HamiltonianResidual",
    "hamiltonian_residual",
    "second_derivative",
    "first_derivative",
    "GHalfConsistency",
    "g_half_kernel_ratio",
    "g_half_kernel_consistency",
]

SERIES_MAX_Z = 0.95
_SERIES_RTOL = 1e-16
_MAX_TERMS = 100_000


def gauss_2f1(a, b, c, z) -> complex:
    """Gauss series sum_m (a)_m (b)_m / ((c)_m m!) z^m for |z| <= 0.95.

    Summation stops once a geometric bound on the tail falls below
    1e-16 of the partial sum; real and imaginary parts are accumulated with
    ``math.fsum``.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if is_gamma_pole(c):
        raise SingularParameter(f"2F1: c = {c} is a non-positive integer")
    az = abs(z)
    if az > SERIES_MAX_Z:
        raise Divergence(f"|z| = {az:.4g} exceeds the series domain {SERIES_MAX_Z}")
    if az == 0:
        return 1 + 0j
    term = 1 + 0j
    re, im = [1.0], [0.0]
    for m in range(_MAX_TERMS):
        ratio = (a + m) * (b + m) / ((c + m) * (m + 1)) * z
        term *= ratio
        re.append(term.real)
        im.append(term.imag)
        if term == 0:
            break
        r = abs(ratio)
        rho = max(r, az)
        if m > abs(a) + abs(b) + abs(c) and rho < 1:
            s = abs(complex(math.fsum(re), math.fsum(im)))
            if abs(term) * rho / (1 - rho) <= _SERIES_RTOL * max(s, 1e-300):
                break
    else:
        raise Divergence("2F1 series did not converge")
    return complex(math.fsum(re), math.fsum(im))


def legendre_q(mu, nu, x: float) -> complex:
    """Q^mu_nu(cosh x), x > 0, through its 2F1 form in e^{-2x}."""
    mu, nu = complex(mu), complex(nu)
    pref = (
        cmath.exp(1j * math.pi * mu)
        * math.sqrt(math.pi)
        * 2**mu
        * math.sinh(x) ** mu
        * cmath.exp(-(nu + mu + 1) * x)
        * cmath.exp(log_gamma(nu + mu + 1) - log_gamma(nu + 1.5))
    )
    return pref * gauss_2f1(mu + 0.5, nu + mu + 1, nu + 1.5, math.exp(-2 * x))


def legendre_p(mu, nu, x: float) -> complex:
    """P^{-mu}_nu(cosh x) from the Q^mu_{-nu-1} - Q^mu_nu connection."""
    mu, nu = complex(mu), complex(nu)
    cos_nu = cmath.cos(math.pi * nu)
    if cos_nu == 0:
        raise SingularParameter("cos(pi nu) = 0")
    q = legendre_q(mu, -nu - 1, x) - legendre_q(mu, nu, x)
    return cmath.exp(-1j * math.pi * mu) / cos_nu * q / (
        complex_gamma(mu + nu + 1) * complex_gamma(mu - nu)
    )


def _check_sl2(lam, x):
    if x <= 0:
        raise ValueError("relative coordinate must be positive")
    half = complex(lam) / 2
    if abs(half.imag) < 1e-14 and abs(half.real - round(half.real)) < 1e-14:
        raise SingularParameter(f"lambda/2 = {half} is an integer")
    if math.exp(-2 * x) > SERIES_MAX_Z:
        raise Divergence(f"x = {x} too small for the e^(-2x) series")


def sl2_phi(lam, g: float, x: float, form: str = "hypergeometric") -> complex:
    """Relative-coordinate part phi^(g)_lambda(x) for x > 0."""
    _check_sl2(lam, x)
    lam = complex(lam)
    h = lam / 2
    if form == "hypergeometric":
        beta = 4 * math.pi**2 * 1j * math.gamma(g) / cmath.sin(math.pi * h)
        z = math.exp(-2 * x)
        first = cmath.exp((h - g) * x + log_gamma(g - h) - log_gamma(1 - h)) * gauss_2f1(
            g, g - h, 1 - h, z
        )
        second = cmath.exp((-h - g) * x + log_gamma(g + h) - log_gamma(1 + h)) * gauss_2f1(
            g, g + h, 1 + h, z
        )
        return beta * (first - second)
    if form == "legendre":
        pref = (
            4j
            * math.pi**1.5
            * 2 ** (0.5 - g)
            * math.gamma(g)
            * cmath.exp(log_gamma(g - h) + log_gamma(g + h))
            * math.sinh(x) ** (0.5 - g)
        )
        return pref * legendre_p(g - 0.5, h - 0.5, x)
    raise ValueError(f"unknown form {form!r}")


def phi_n2_closed(lam1, lam2, g: float, x1: float, x2: float, form: str = "hypergeometric") -> complex:
    """Closed-form Phi for n = 2 with the d gamma = i dt measure.

    Phi is symmetric in (x1, x2), so x1 < x2 is accepted and evaluated at
    the swapped point.
    """
    x = abs(x1 - x2)
    centre = cmath.exp((complex(lam1) + complex(lam2)) * (x1 + x2) / 2)
    return centre * sl2_phi(complex(lam1) - complex(lam2), g, x, form)


# -- finite differences -----------------------------------------------------

def second_derivative(fm2, fm1, f0, fp1, fp2, step):
    return (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * step * step)


def first_derivative(fm2, fm1, fp1, fp2, step):
    return (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * step)


def n2_ode_residual(lam, g: float, x: float, step: float = 1e-3, form: str = "hypergeometric") -> float:
    """Relative residual of (d^2 + 2g coth d) phi = (lambda^2/4 - g^2) phi."""
    vals = [sl2_phi(lam, g, x + k * step, form) for k in (-2, -1, 0, 1, 2)]
    d2 = second_derivative(*vals, step)
    d1 = first_derivative(vals[0], vals[1], vals[3], vals[4], step)
    lhs = d2 + 2 * g / math.tanh(x) * d1
    rhs = (complex(lam) ** 2 / 4 - g * g) * vals[2]
    return abs(lhs - rhs) / abs(vals[2])


@dataclass(frozen=True)
class HamiltonianResidual:
    """Relative eigenvalue residuals at one point.

    ``h2_single_residual`` uses the pair potential without the factor 2,
    kept to show the two forms are distinguishable.
    """

    h1_residual: float
    h2_residual: float
    gauge_residual: float
    fd_step: float
    h2_single_residual: float = math.nan


def hamiltonian_residual(
    evaluate: Callable[[np.ndarray], tuple],
    lam: Sequence,
    g: float,
    x: Sequence[float],
    fd_step: float = 1e-3,
) -> HamiltonianResidual:
    """Apply H1, H2 to Psi and the gauge operator to Phi by 5-point stencils.

    ``evaluate(x)`` must return ``(Phi(x), Psi(x))``.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=complex)
    n = x.size
    if lam.size != n:
        raise ValueError("lambda and x lengths differ")
    if n > 1:
        gap = min(abs(x[p] - x[q]) for p, q in combinations(range(n), 2))
        if gap <= 5 * fd_step:
            raise StencilTooWide(f"closest pair {gap:.3g} is within 5 * fd_step = {5 * fd_step:.3g}")

    phi0, psi0 = evaluate(x)
    phi0, psi0 = complex(phi0), complex(psi0)
    d1_phi, d2_phi, d1_psi, d2_psi = (np.zeros(n, complex) for _ in range(4))
    for i in range(n):
        pts = {}
        for k in (-2, -1, 1, 2):
            y = x.copy()
            y[i] += k * fd_step
            pts[k] = tuple(complex(v) for v in evaluate(y))
        for which, d1, d2, centre in ((0, d1_phi, d2_phi, phi0), (1, d1_psi, d2_psi, psi0)):
            f = {k: v[which] for k, v in pts.items()}
            d1[i] = first_derivative(f[-2], f[-1], f[1], f[2], fd_step)
            d2[i] = second_derivative(f[-2], f[-1], centre, f[1], f[2], fd_step)

    lam_sq = complex(np.sum(lam * lam))
    potential = sum(
        g * (g - 1) / math.sinh(x[p] - x[q]) ** 2 for p, q in combinations(range(n), 2)
    )
    h1 = abs(d1_psi.sum() - lam.sum() * psi0) / abs(psi0)
    kinetic = -d2_psi.sum()
    h2 = abs(kinetic + 2 * potential * psi0 + lam_sq * psi0) / abs(psi0)
    h2_single = abs(kinetic + potential * psi0 + lam_sq * psi0) / abs(psi0)
    rho_sq = n * (n * n - 1) / 12
    drift = sum(
        2 * g / math.tanh(x[p] - x[q]) * (d1_phi[p] - d1_phi[q])
        for p, q in combinations(range(n), 2)
    )
    gauge = abs(d2_phi.sum() + drift - (lam_sq - 4 * g * g * rho_sq) * phi0) / abs(phi0)
    return HamiltonianResidual(float(h1), float(h2), float(gauge), fd_step, float(h2_single))


# -- g = 1/2 -------------------------------------------------------------------

def _log_spherical_kernel(p: GzPattern) -> complex:
    """Log of the g = 1/2 kernel whose denominator is prod_{r != s} Gamma(gamma_r - gamma_s)."""
    n = p.n
    num, den = [], []
    for i in range(1, n):
        for a in p.row(i):
            for b in p.row(i + 1):
                num.append((a - b) / 2 + 0.25)
                num.append((b - a) / 2 + 0.25)
        row = p.row(i)
        for r in range(i):
            for s in range(i):
                if r != s:
                    den.append(row[r] - row[s])
    total = complex(np.sum(log_gamma(np.array(num, complex)))) if num else 0j
    if den:
        total -= complex(np.sum(log_gamma(np.array(den, complex))))
    return total


def g_half_kernel_ratio(p: GzPattern) -> complex:
    """K^(1/2)(p) divided by the spherical-function kernel at p."""
    return cmath.exp(log_kernel(p, 0.5).log - _log_spherical_kernel(p))


@dataclass(frozen=True)
class GHalfConsistency:
    deviation: float
    constant: complex
    samples: int


def g_half_kernel_consistency(lam: Sequence, samples: int = 50, seed: int = 0,
                              spread: float = 4.0) -> GHalfConsistency:
    """Spread of the kernel ratio over random contour points.

    Returns the maximal relative deviation of the ratio from its mean and
    the mean itself.
    """
    lam = tuple(complex(v) for v in lam)
    n = len(lam)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(samples):
        lower = [tuple(1j * rng.uniform(-spread, spread, i)) for i in range(1, n)]
        ratios.append(g_half_kernel_ratio(GzPattern.from_lambda(lam, lower)))
    ratios = np.array(ratios)
    mean = ratios.mean()
    return GHalfConsistency(float(np.max(np.abs(ratios / mean - 1))), complex(mean), samples)

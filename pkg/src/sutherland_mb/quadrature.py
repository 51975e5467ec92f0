"""Numerical evaluation of Phi and Psi on the imaginary contour.

The contour variables are gamma_{i,j} = i t_{i,j} with t on a uniform grid
t = h m, |m| <= M.  On such a grid every Gamma factor of the kernel depends
either on one index (terms against the spectral row) or on a difference of
two indices, so the kernel is assembled from 1-D log tables and never calls
log_gamma per node.  The exponential factor only sees the row sums of t:

    sum_i h_i x_i = i sum_{r<n} T_r (x_r - x_{r+1}) + i (sum mu) x_n,

so the kernel weights are binned by row sums once and each x costs a small
separable contraction.  Measure: d gamma = i dt per coordinate.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import special, stats
from scipy.stats import qmc

from .errors import CoincidentCoordinates, GridTooCoarse
from .kernel import log_kernel_contour
from .special import log_gamma

__all__ = [
    "GridSpec",
    "QuadratureResult",
    "PhiIntegral",
    "QmcPhiIntegral",
    "eval_phi",
    "eval_psi",
    "refine_until",
    "gauge_factor",
    "spectral_imag_parts",
]

DENSE_NODE_LIMIT = 2_000_000_000


@dataclass(frozen=True)
class GridSpec:
    """Truncation half-width T, step h and number of h-halvings."""

    half_width: float
    step: float = 0.25
    refinement_levels: int = 1

    def __post_init__(self):
        if not (self.half_width > 0 and self.step > 0):
            raise ValueError("grid half_width and step must be positive")
        ratio = self.half_width / self.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 8:
            raise ValueError(f"half_width/step must be an integer >= 8, got {ratio}")
        if self.refinement_levels < 0:
            raise ValueError("refinement_levels must be >= 0")

    @classmethod
    def for_tolerance(cls, n: int, tol: float, step: float = 0.25, refinement_levels: int = 1):
        """T = (n/pi)(ln(1/tol) + 10), rounded up to a multiple of ``step``."""
        if tol <= 0:
            raise ValueError("tol must be positive")
        t = (max(n, 1) / math.pi) * (math.log(1.0 / tol) + 10.0)
        m = max(8, math.ceil(t / step - 1e-9))
        return cls(m * step, step, refinement_levels)

    @property
    def half_count(self) -> int:
        return round(self.half_width / self.step)

    def steps(self) -> list[float]:
        return [self.step / 2**level for level in range(self.refinement_levels + 1)]

    def nodes(self, d: int, level: int | None = None) -> int:
        level = self.refinement_levels if level is None else level
        return (2 * self.half_count * 2**level + 1) ** d


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    nodes: int
    level: int = 0


def spectral_imag_parts(lam: Sequence) -> np.ndarray:
    """Imaginary parts of lambda; rejects entries off the imaginary axis."""
    arr = np.asarray(lam, dtype=complex).ravel()
    if arr.size == 0:
        raise ValueError("lambda must have at least one entry")
    if np.any(np.abs(arr.real) > 1e-14 * np.maximum(1.0, np.abs(arr))):
        raise ValueError("lambda must be purely imaginary")
    return arr.imag.astype(float)


def gauge_factor(x: Sequence[float], g: float) -> float:
    """prod_{p<q} |sinh(x_p - x_q)|^g."""
    x = np.asarray(x, dtype=float)
    out = 1.0
    for p, q in combinations(range(x.size), 2):
        if abs(x[p] - x[q]) < 1e-12:
            raise CoincidentCoordinates(f"x_{p + 1} and x_{q + 1} coincide")
        out *= abs(math.sinh(x[p] - x[q])) ** g
    return out


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, int(threads))


def _row_vars(n: int) -> list[list[int]]:
    rows, col = [], 0
    for i in range(1, n):
        rows.append(list(range(col, col + i)))
        col += i
    return rows


def _phase_contract(weights, row_sums_axes, dx, prefactor):
    res = weights
    for r in reversed(range(len(row_sums_axes))):
        res = (res * np.exp(1j * row_sums_axes[r] * dx[r])).sum(axis=-1)
    return complex(prefactor * res)


class _DenseLevel:
    """Kernel weights at one grid step, binned by row sums."""

    def __init__(self, mu, g, step, half_count, threads):
        n = mu.size
        self.step, self.half_count = step, half_count
        m_max = half_count
        size = 2 * m_max + 1
        d = n * (n - 1) // 2
        self.nodes = size**d
        if self.nodes > DENSE_NODE_LIMIT:
            raise GridTooCoarse(
                f"dense grid with {self.nodes} nodes exceeds the limit; use QmcPhiIntegral"
            )

        t = step * np.arange(-m_max, m_max + 1)
        diff = step * np.arange(-2 * m_max, 2 * m_max + 1)
        pair_num = 2.0 * log_gamma((g + 1j * diff) / 2).real
        spec = np.zeros(size)
        for m in mu:
            spec += 2.0 * log_gamma((g + 1j * (t - m)) / 2).real
        den = np.full(diff.size, np.inf)
        nz = diff != 0
        den[nz] = (
            2.0 * log_gamma(1j * diff[nz] / 2).real + 2.0 * log_gamma(g + 1j * diff[nz] / 2).real
        )

        rows = _row_vars(n)
        pairs = []  # (var_a, var_b, table, sign)
        for i in range(len(rows) - 1):
            for a in rows[i]:
                for b in rows[i + 1]:
                    pairs.append((a, b, pair_num, 1.0))
        for row in rows:
            for a, b in combinations(row, 2):
                pairs.append((a, b, den, -1.0))
        singles = rows[-1]

        rest = d - 1
        shape = (size,) * rest

        def axis_index(var):
            view = [1] * rest
            view[var - 1] = size
            return np.arange(size).reshape(view)

        base = np.zeros(shape)
        for a, b, table, sign in pairs:
            if a > 0:
                base = base + sign * table[axis_index(a) - axis_index(b) + 2 * m_max]
        for v in singles:
            if v > 0:
                base = base + spec[axis_index(v)]

        sum_dims = [len(row) * (size - 1) + 1 for row in rows[1:]]
        if sum_dims:
            sums = [sum(axis_index(v) for v in row) for row in rows[1:]]
            sums = [np.broadcast_to(s, shape) for s in sums]
            flat = np.ravel_multi_index(sums, sum_dims).ravel()
            nbins = int(np.prod(sum_dims))
        links = [(b, table, sign) for a, b, table, sign in pairs if a == 0]
        head_single = 0 in singles

        def chunk(idx):
            val = base
            for b, table, sign in links:
                val = val + sign * table[idx - axis_index(b) + 2 * m_max]
            if head_single:
                val = val + spec[idx]
            w = np.exp(val)
            if not sum_dims:
                return float(w)
            return np.bincount(flat, weights=np.ravel(w), minlength=nbins)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, range(size)))
        self.weights = np.stack(parts).reshape([size] + sum_dims) if sum_dims else np.array(parts)
        self.row_sums = [
            step * (np.arange(r * (size - 1) + 1) - r * m_max) for r in range(1, n)
        ]
        self.prefactor = (1j * step) ** d

    def value(self, dx, spectral_phase):
        return _phase_contract(self.weights, self.row_sums, dx, self.prefactor * spectral_phase)


class PhiIntegral:
    """Trapezoidal quadrature for Phi at fixed (lambda, g, grid).

    The kernel is tabulated once per refinement level; calling the object
    with a point x returns a QuadratureResult whose error estimate is the
    difference between the two finest levels.
    """

    def __init__(self, lam, g: float, grid: GridSpec | None = None, *, tol: float = 1e-8,
                 threads: int = 1):
        if not g > 0:
            raise ValueError("coupling g must be positive")
        self.mu = spectral_imag_parts(lam)
        self.n = self.mu.size
        self.d = self.n * (self.n - 1) // 2
        self.g = float(g)
        self.grid = grid or GridSpec.for_tolerance(self.n, tol)
        self.threads = _resolve_threads(threads)
        self.levels: list[_DenseLevel] = []
        self._companion = None
        if self.n > 1:
            for step in self.grid.steps():
                self._build(step, round(self.grid.half_width / step))

    def _build(self, step, half_count):
        level = _DenseLevel(self.mu, self.g, step, half_count, self.threads)
        self.levels.append(level)
        return level

    def add_level(self) -> None:
        """Halve the step of the finest level."""
        last = self.levels[-1]
        self._build(last.step / 2, last.half_count * 2)

    def _coarse_reference(self):
        if len(self.levels) >= 2:
            return self.levels[-2]
        if self._companion is None:
            top = self.levels[-1]
            self._companion = _DenseLevel(
                self.mu, self.g, 2 * top.step, max(4, top.half_count // 2), self.threads
            )
        return self._companion

    def _dx(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n:
            raise ValueError(f"x must have {self.n} coordinates, got {x.size}")
        return -np.diff(x), complex(np.exp(1j * self.mu.sum() * x[-1]))

    def level_values(self, x) -> list[complex]:
        dx, phase = self._dx(x)
        if self.n == 1:
            return [phase]
        return [lvl.value(dx, phase) for lvl in self.levels]

    def __call__(self, x) -> QuadratureResult:
        dx, phase = self._dx(x)
        if self.n == 1:
            return QuadratureResult(phase, 0.0, 1, 0)
        fine = self.levels[-1].value(dx, phase)
        coarse = self._coarse_reference().value(dx, phase)
        return QuadratureResult(fine, abs(fine - coarse), self.levels[-1].nodes, len(self.levels) - 1)

    def psi(self, x) -> QuadratureResult:
        gf = gauge_factor(x, self.g)
        r = self(x)
        return QuadratureResult(gf * r.value, gf * r.error_estimate, r.nodes, r.level)


class QmcPhiIntegral:
    """Randomised quasi-Monte Carlo estimate of Phi for larger n.

    Base density: each coordinate is t = c + (n/pi) asinh(kappa u) with u
    standard Cauchy and c the midpoint of the spectral parameters.  Its tails
    fall like exp(-pi |t - c| / n), no faster than the kernel, and ``kappa``
    sets the width of the core.

    With ``adapt`` a pilot run from the base density fixes the mean and
    covariance of the kernel mass, and the sampling density becomes the
    defensive mixture ``defensive * base + (1 - defensive) * Student-t``.
    The base component keeps every weight bounded by K / (defensive * base).

    ``replicas`` independent Owen-scrambled Sobol sets give the error
    estimate (standard error of the replica means).
    """

    def __init__(self, lam, g: float, *, points: int = 2**16, replicas: int = 8, seed: int = 0,
                 core: float = 0.5, adapt: bool = True, pilot_points: int = 2**14,
                 defensive: float = 0.2, df: float = 8.0):
        if not g > 0:
            raise ValueError("coupling g must be positive")
        if replicas < 2:
            raise ValueError("need at least two replicas for an error estimate")
        if not core > 0:
            raise ValueError("core width must be positive")
        if not 0 < defensive <= 1:
            raise ValueError("defensive weight must lie in (0, 1]")
        self.mu = spectral_imag_parts(lam)
        self.lam = 1j * self.mu
        self.n = self.mu.size
        self.d = self.n * (self.n - 1) // 2
        self.g = float(g)
        self.replicas = []
        self.nodes = 1
        if self.n == 1:
            return
        self._centre = 0.5 * (self.mu.max() + self.mu.min())
        self._scale = self.n / math.pi
        self._core = float(core)
        self._rows = _row_vars(self.n)
        seeds = np.random.SeedSequence(seed).spawn(replicas + 1)
        self._mix = None
        if adapt:
            t, w = self._sample(seeds[-1], pilot_points, None)
            wn = w / w.sum()
            mean = wn @ t
            cov = (t - mean).T @ ((t - mean) * wn[:, None]) + 1e-6 * np.eye(self.d)
            self._mix = (float(defensive), float(df), mean, cov)
        for ss in seeds[:replicas]:
            t, w = self._sample(ss, points, self._mix)
            sums = np.stack([t[:, row].sum(axis=1) for row in self._rows], axis=1)
            self.replicas.append((w / points, sums))
        self.nodes = points * replicas + (pilot_points if adapt else 0)

    def _log_base_density(self, t):
        y = (t - self._centre) / self._scale
        k = self._core
        log_cosh = np.abs(y) + np.log1p(np.exp(-2 * np.abs(y))) - math.log(2.0)
        log_sinh_sq = 2 * (np.abs(y) + np.log(-np.expm1(-2 * np.abs(y))) - math.log(2.0))
        log_denom = np.logaddexp(2 * math.log(k), log_sinh_sq)
        return (math.log(k) - log_denom + log_cosh - math.log(math.pi * self._scale)).sum(axis=1)

    def _sample(self, seed_seq, points, mix):
        d = self.d
        extra = 0 if mix is None else 2
        v = qmc.Sobol(d + extra, scramble=True, seed=np.random.default_rng(seed_seq)).random(points)
        v = np.clip(v, 1e-15, 1 - 1e-15)
        coords = v[:, extra:]
        t = self._centre + self._scale * np.arcsinh(self._core * np.tan(np.pi * (coords - 0.5)))
        log_q = self._log_base_density(t)
        if mix is not None:
            alpha, df, mean, cov = mix
            student = v[:, 0] >= alpha
            chol = np.linalg.cholesky(cov)
            z = special.ndtri(coords[student])
            radial = np.sqrt(df / stats.chi2.ppf(v[student, 1], df))
            t[student] = mean + (z @ chol.T) * radial[:, None]
            log_t = stats.multivariate_t(loc=mean, shape=cov, df=df).logpdf(t)
            log_q = np.logaddexp(math.log(alpha) + self._log_base_density(t),
                                 math.log1p(-alpha) + log_t) if alpha < 1 else self._log_base_density(t)
        return t, np.exp(log_kernel_contour(t, self.mu, self.g) - log_q)

    def __call__(self, x) -> QuadratureResult:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n:
            raise ValueError(f"x must have {self.n} coordinates, got {x.size}")
        phase = complex(np.exp(1j * self.mu.sum() * x[-1]))
        if self.n == 1:
            return QuadratureResult(phase, 0.0, 1, 0)
        dx = -np.diff(x)
        pref = (1j**self.d) * phase
        vals = np.array([pref * np.sum(w * np.exp(1j * (s @ dx))) for w, s in self.replicas])
        err = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        return QuadratureResult(complex(vals.mean()), err, self.nodes, 0)


def _relative(err, value):
    return err / max(abs(value), 1e-300)


def eval_phi(lam, g: float, x, grid: GridSpec | None = None, *, tol: float | None = None,
             threads: int = 1, max_levels: int = 4) -> QuadratureResult:
    """Phi at one point.

    With ``tol`` set, levels are added (up to ``max_levels`` halvings beyond
    the grid) until the relative error estimate is below ``tol``; otherwise
    GridTooCoarse is raised.
    """
    integral = PhiIntegral(lam, g, grid, tol=tol or 1e-8, threads=threads)
    res = integral(x)
    if tol is None:
        return res
    for _ in range(max_levels):
        if _relative(res.error_estimate, res.value) <= tol:
            break
        integral.add_level()
        res = integral(x)
    if _relative(res.error_estimate, res.value) > tol:
        raise GridTooCoarse(f"relative error estimate {res.error_estimate / abs(res.value):.3e} > {tol}")
    return res


def eval_psi(lam, g: float, x, grid: GridSpec | None = None, *, tol: float | None = None,
             threads: int = 1, max_levels: int = 4) -> QuadratureResult:
    gf = gauge_factor(x, g)
    res = eval_phi(lam, g, x, grid, tol=tol, threads=threads, max_levels=max_levels)
    return QuadratureResult(gf * res.value, gf * res.error_estimate, res.nodes, res.level)


def refine_until(lam, g: float, x, tol: float, max_levels: int = 6, *,
                 grid: GridSpec | None = None, threads: int = 1) -> QuadratureResult:
    """Halve the step until successive levels agree to relative ``tol``.

    Returns the last result; ``level`` is the number of halvings used.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = spectral_imag_parts(lam).size
    base = grid or GridSpec.for_tolerance(n, tol)
    integral = PhiIntegral(lam, g, GridSpec(base.half_width, base.step, 0), threads=threads)
    if n == 1:
        return integral(x)
    prev = integral.level_values(x)[-1]
    for level in range(1, max_levels + 1):
        integral.add_level()
        cur = integral.level_values(x)[-1]
        if _relative(abs(cur - prev), cur) < tol:
            return QuadratureResult(cur, abs(cur - prev), integral.levels[-1].nodes, level)
        prev = cur
    raise GridTooCoarse(f"no convergence to {tol} within {max_levels} refinements")

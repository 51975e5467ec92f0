"""Identity suite for the difference-operator representation and the kernel.

Exact checks run on ``Fraction`` patterns and must give residual 0; the
kernel checks run in floating point against fixed tolerances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gz
from .errors import DenominatorZero
from .gz import GzPattern, enumerate_shift_tuples
from .kernel import log_kernel, reduce_phase, verify_lemma4

__all__ = ["CheckResult", "IdentitySuite", "run_identity_suite", "LEMMA4_TOL", "KERNEL_TOL"]

LEMMA4_TOL = 1e-10
KERNEL_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    n: int
    cases: int = 0
    max_residual: float = 0.0
    exact: bool = True
    tol: float = 0.0
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        if self.exact:
            return self.max_residual == 0
        return self.max_residual < self.tol

    def record(self, residual) -> None:
        self.cases += 1
        r = float(abs(residual))
        if self.exact and residual != 0:
            r = max(r, math.ulp(0.0))
        if r > self.max_residual or math.isnan(r):
            self.max_residual = r


@dataclass
class IdentitySuite:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)


# -- sampling ----------------------------------------------------------------

def _exact_point(n, rng):
    """Rational pattern and coupling at which every coefficient is finite."""
    while True:
        p = gz.random_rational_pattern(n, rng)
        g = Fraction(int(rng.integers(1, 20)), int(rng.integers(1, 7)))
        try:
            for i in range(1, n):
                for j in range(i + 1, n + 1):
                    for k in enumerate_shift_tuples(i, j, n):
                        gz.coeff_a(i, j, k, p, g)
                        gz.coeff_b(i, j, k, p, g)
                        gz.coeff_a_composed(i, j, k, p, g)
                        gz.coeff_b_composed(i, j, k, p, g)
                        gz.coeff_a(i, j, k, p.shifted(k, 2 * g), g)
        except DenominatorZero:
            continue
        return p, g


def _contour_pattern(n, rng, spread=3.0):
    rows = tuple(tuple(1j * rng.uniform(-spread, spread, i)) for i in range(1, n + 1))
    return GzPattern(rows)


def _test_functions(n):
    """Two polynomial test functions of degree <= 2 in the pattern entries."""
    def f1(p):
        flat = [v for row in p.rows for v in row]
        s = sum(flat)
        return 1 + sum((m + 1) * v for m, v in enumerate(flat)) + s * s

    def f2(p):
        flat = [v for row in p.rows for v in row]
        return 3 + flat[0] * flat[-1] - 2 * flat[len(flat) // 2] + sum(v * v for v in flat)

    return f1, f2


# -- suite -------------------------------------------------------------------

def run_identity_suite(n_max: int = 5, points: int = 20, seed: int = 0, *,
                       numeric_n=(2, 3), laplace_n_max: int = 3, commutator_n_max: int = 4,
                       coeff_b=None) -> IdentitySuite:
    """Run every identity check; ``coeff_b`` replaces the b coefficient
    (used to inject faults)."""
    rng = np.random.default_rng(seed)
    suite = IdentitySuite()
    b_fn = coeff_b or gz.coeff_b

    def lemma2(i, j, p, g):
        lhs = sum(b_fn(i, j, k, p, g) - gz.coeff_a(i, j, k, p, g)
                  for k in enumerate_shift_tuples(i, j, p.n))
        return lhs - 2 * g * (gz.weight_h(p, i) - gz.weight_h(p, j))

    def lemma3(p, g):
        n = p.n
        lhs = sum(gz.coeff_a(i, j, k, p, g) + b_fn(i, j, k, p, g)
                  for i in range(1, n) for j in range(i + 1, n + 1)
                  for k in enumerate_shift_tuples(i, j, n))
        rhs = (sum(gz.weight_h(p, i) ** 2 for i in range(1, n + 1))
               - sum(v * v for v in p.lam) + 4 * g * g * gz.rho_squared(n))
        return lhs - rhs

    for n in range(1, n_max + 1):
        checks = {name: CheckResult(name, n) for name in
                  ("lemma2", "lemma3", "ab_shift", "composition")}
        start = time.perf_counter()
        for _ in range(points):
            p, g = _exact_point(n, rng)
            checks["lemma3"].record(lemma3(p, g))
            for i in range(1, n):
                for j in range(i + 1, n + 1):
                    checks["lemma2"].record(lemma2(i, j, p, g))
                    for k in enumerate_shift_tuples(i, j, n):
                        checks["ab_shift"].record(
                            gz.coeff_a(i, j, k, p.shifted(k, 2 * g), g) - b_fn(i, j, k, p, g))
                        ra, _ = gz.verify_composition(i, j, k, p, g)
                        rb = b_fn(i, j, k, p, g) - gz.coeff_b_composed(i, j, k, p, g)
                        checks["composition"].record(max(abs(ra), abs(rb)))
        elapsed = time.perf_counter() - start
        for c in checks.values():
            c.seconds = elapsed
            suite.checks.append(c)

    for n in range(1, laplace_n_max + 1):
        c = CheckResult("laplace", n)
        start = time.perf_counter()
        f1, f2 = _test_functions(n)
        for _ in range(max(1, points // 4)):
            p, g = _exact_point(n, rng)
            target = gz.laplace2_eigenvalue(p.lam, g)
            for f in (f1, f2):
                fp = f(p)
                if fp == 0:
                    continue
                c.record(gz.laplace2_apply(f, p, g) / fp - target)
                c.record(gz.laplace1_apply(f, p, g) / fp - gz._div(sum(p.lam), 2 * g))
        c.seconds = time.perf_counter() - start
        suite.checks.append(c)

    for n in range(2, commutator_n_max + 1):
        c = CheckResult("commutator", n)
        start = time.perf_counter()
        f1, f2 = _test_functions(n)
        for _ in range(max(1, points // 4)):
            p, g = _exact_point(n, rng)
            for f in (f1, f2):
                for i in range(1, n):
                    up = lambda q, i=i: gz.apply_generator(i + 1, i, f, q, g)
                    down = lambda q, i=i: gz.apply_generator(i, i + 1, f, q, g)
                    lhs = gz.apply_generator(i, i + 1, up, p, g) - gz.apply_generator(i + 1, i, down, p, g)
                    rhs = gz.apply_generator(i, i, f, p, g) - gz.apply_generator(i + 1, i + 1, f, p, g)
                    c.record(lhs - rhs)
        c.seconds = time.perf_counter() - start
        suite.checks.append(c)

    for n in numeric_n:
        c4 = CheckResult("lemma4", n, exact=False, tol=LEMMA4_TOL)
        pos = CheckResult("kernel_positivity", n, exact=False, tol=KERNEL_TOL)
        sym = CheckResult("kernel_symmetry", n, exact=False, tol=KERNEL_TOL)
        start = time.perf_counter()
        for _ in range(points):
            p = _contour_pattern(n, rng)
            g = float(rng.uniform(0.3, 2.0))
            for i in range(1, n):
                for j in range(i + 1, n + 1):
                    for k in enumerate_shift_tuples(i, j, n):
                        c4.record(verify_lemma4(i, j, k, p, g))
            base = log_kernel(p, g)
            pos.record(reduce_phase(base.phase))
            for _ in range(3):
                shuffled = GzPattern(tuple(tuple(rng.permutation(np.array(r))) for r in p.rows))
                other = log_kernel(shuffled, g)
                sym.record((other.log_modulus - base.log_modulus) / max(1.0, abs(base.log_modulus)))
        elapsed = time.perf_counter() - start
        for c in (c4, pos, sym):
            c.seconds = elapsed
            suite.checks.append(c)
    return suite

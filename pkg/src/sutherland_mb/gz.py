"""Gelfand-Zetlin patterns and the difference-operator representation of gl(n).

Every formula here is written once and runs on whatever scalar type the
pattern carries: ``fractions.Fraction`` (exact, used to check identities with
zero residual) or ``complex`` (used by the analytic pipeline).  Rows are
1-based to match the usual gamma_{i,j} indexing; row n holds the spectral
parameters.

Operators act on plain callables ``f(pattern) -> scalar``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DenominatorZero, InvalidRange

__all__ = [
    "GzPattern",
    "ShiftTuple",
    "enumerate_shift_tuples",
    "weight_h",
    "rho_squared",
    "coeff_c",
    "coeff_a",
    "coeff_b",
    "coeff_a_composed",
    "coeff_b_composed",
    "apply_generator",
    "laplace1_apply",
    "laplace2_apply",
    "laplace2_eigenvalue",
    "verify_lemma2",
    "verify_lemma3",
    "verify_ab_shift",
    "verify_composition",
    "random_rational_pattern",
    "random_rational",
]

LOWER = "lower"
RAISE = "raise"


@dataclass(frozen=True)
class GzPattern:
    """Triangular array gamma_{i,j}, 1 <= j <= i <= n; ``rows[i-1]`` is row i."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if not rows:
            raise ValueError("pattern needs at least one row")
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise ValueError(f"row {i} has {len(row)} entries, expected {i}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_lambda(cls, lam: Sequence, lower: Sequence[Sequence] = ()):
        return cls(tuple(lower) + (tuple(lam),))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def lam(self) -> tuple:
        return self.rows[-1]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i - 1][j - 1]

    def row(self, i: int) -> tuple:
        return self.rows[i - 1] if i >= 1 else ()

    def shifted(self, k: "ShiftTuple", delta) -> "GzPattern":
        """Add ``delta`` to gamma_{m, k_m} for m = k.i .. k.j - 1."""
        rows = [list(r) for r in self.rows]
        for m, km in k.items():
            rows[m - 1][km - 1] = rows[m - 1][km - 1] + delta
        return GzPattern(tuple(tuple(r) for r in rows))

    def map(self, fn) -> "GzPattern":
        return GzPattern(tuple(tuple(fn(v) for v in r) for r in self.rows))


@dataclass(frozen=True)
class ShiftTuple:
    """Element (k_i, ..., k_{j-1}) of S_{i,j}."""

    i: int
    j: int
    k: tuple

    def __post_init__(self):
        if len(self.k) != self.j - self.i:
            raise InvalidRange(f"tuple {self.k} has wrong length for S_({self.i},{self.j})")
        for m, km in self.items():
            if not 1 <= km <= m:
                raise InvalidRange(f"k_{m}={km} outside 1..{m}")

    def items(self):
        return zip(range(self.i, self.j), self.k)

    def at(self, m: int):
        """k_m, or None when m is outside i..j-1."""
        if self.i <= m < self.j:
            return self.k[m - self.i]
        return None


def enumerate_shift_tuples(i: int, j: int, n: int) -> list[ShiftTuple]:
    """All of S_{i,j} in lexicographic order."""
    if not (1 <= i < j <= n):
        raise InvalidRange(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    ranges = [range(1, m + 1) for m in range(i, j)]
    return [ShiftTuple(i, j, k) for k in itertools.product(*ranges)]


def weight_h(p: GzPattern, i: int):
    """h_i = sum of row i minus sum of row i-1."""
    if not 1 <= i <= p.n:
        raise InvalidRange(f"row {i} outside 1..{p.n}")
    return sum(p.row(i)) - sum(p.row(i - 1))


def rho_squared(n: int) -> Fraction:
    return Fraction(n * (n * n - 1), 12)


def _div(a, b):
    # int / int must stay exact
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def _check(den):
    if den == 0:
        raise DenominatorZero("coincident entries in a Gelfand-Zetlin denominator")
    return den


def _neighbour_product(p, k, m, x, side, offset):
    """prod over r (r != k_side) of (x - gamma_{side,r} + offset)."""
    excl = k.at(side)
    out = 1
    for r, v in enumerate(p.row(side), start=1):
        if r != excl:
            out *= x - v + offset
    return out


def coeff_c(direction: str, i: int, j: int, k: ShiftTuple, p: GzPattern, g):
    """Coefficient of the k-th summand of e_{i,j} ("lower", shift -2g) or e_{j,i} ("raise", shift +2g)."""
    if direction not in (LOWER, RAISE):
        raise ValueError(f"direction must be 'lower' or 'raise', got {direction!r}")
    if (k.i, k.j) != (i, j):
        raise InvalidRange(f"tuple belongs to S_({k.i},{k.j}), not S_({i},{j})")
    num, den = 1, 1
    for m, km in k.items():
        x = p[m, km]
        if direction == LOWER:
            num *= _neighbour_product(p, k, m, x, m + 1, -g)
        else:
            num *= _neighbour_product(p, k, m, x, m - 1, g)
        for r, v in enumerate(p.row(m), start=1):
            if r != km:
                den *= _check(x - v)
    return _div(num, _check(den))


def _ab(i, j, k, p, g, sign):
    num, den = 1, 1
    for m, km in k.items():
        x = p[m, km]
        num *= _neighbour_product(p, k, m, x, m + 1, sign * g)
        num *= _neighbour_product(p, k, m, x, m - 1, sign * g)
        for r, v in enumerate(p.row(m), start=1):
            if r != km:
                den *= _check(x - v) * _check(x - v + 2 * sign * g)
    return _div(num, _check(den))


def coeff_a(i: int, j: int, k: ShiftTuple, p: GzPattern, g):
    """Closed product for a^k_{i,j}."""
    return _ab(i, j, k, p, g, -1)


def coeff_b(i: int, j: int, k: ShiftTuple, p: GzPattern, g):
    """Closed product for b^k_{i,j}."""
    return _ab(i, j, k, p, g, 1)


def coeff_a_composed(i, j, k, p, g):
    """a = c_{i,j}(gamma) * c_{j,i}(gamma - 2g along k)."""
    return coeff_c(LOWER, i, j, k, p, g) * coeff_c(RAISE, i, j, k, p.shifted(k, -2 * g), g)


def coeff_b_composed(i, j, k, p, g):
    """b = c_{j,i}(gamma) * c_{i,j}(gamma + 2g along k)."""
    return coeff_c(RAISE, i, j, k, p, g) * coeff_c(LOWER, i, j, k, p.shifted(k, 2 * g), g)


Func = Callable[[GzPattern], object]


def apply_generator(i: int, j: int, f: Func, p: GzPattern, g):
    """(e_{i,j} f)(p) in the difference-operator realisation with step 2g."""
    n = p.n
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidRange(f"generator index ({i},{j}) outside 1..{n}")
    if i == j:
        return _div(weight_h(p, i), 2 * g) * f(p)
    if i < j:
        total = sum(
            coeff_c(LOWER, i, j, k, p, g) * f(p.shifted(k, -2 * g))
            for k in enumerate_shift_tuples(i, j, n)
        )
        return _div(-total, 2 * g)
    total = sum(
        coeff_c(RAISE, j, i, k, p, g) * f(p.shifted(k, 2 * g))
        for k in enumerate_shift_tuples(j, i, n)
    )
    return _div(total, 2 * g)


def laplace1_apply(f: Func, p: GzPattern, g):
    return sum(apply_generator(i, i, f, p, g) for i in range(1, p.n + 1))


def laplace2_apply(f: Func, p: GzPattern, g):
    """sum_{i,j} e_{i,j} e_{j,i} f at p, by composing generator actions."""
    n = p.n
    total = 0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            inner = lambda q, i=i, j=j: apply_generator(j, i, f, q, g)
            total += apply_generator(i, j, inner, p, g)
    return total


def laplace2_eigenvalue(lam: Sequence, g):
    n = len(lam)
    return _div(sum(v * v for v in lam) - 4 * g * g * rho_squared(n), 4 * g * g)


def verify_lemma2(i: int, j: int, p: GzPattern, g):
    """sum_k (b^k - a^k) - 2g (h_i - h_j); zero on an exact backend."""
    lhs = sum(
        coeff_b(i, j, k, p, g) - coeff_a(i, j, k, p, g)
        for k in enumerate_shift_tuples(i, j, p.n)
    )
    return lhs - 2 * g * (weight_h(p, i) - weight_h(p, j))


def verify_lemma3(p: GzPattern, g):
    n = p.n
    lhs = 0
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            for k in enumerate_shift_tuples(i, j, n):
                lhs += coeff_a(i, j, k, p, g) + coeff_b(i, j, k, p, g)
    lam2 = sum(v * v for v in p.lam)
    rhs = sum(weight_h(p, i) ** 2 for i in range(1, n + 1)) - lam2 + 4 * g * g * rho_squared(n)
    return lhs - rhs


def verify_ab_shift(i: int, j: int, k: ShiftTuple, p: GzPattern, g):
    """a^k(p shifted by +2g along k) - b^k(p)."""
    return coeff_a(i, j, k, p.shifted(k, 2 * g), g) - coeff_b(i, j, k, p, g)


def verify_composition(i: int, j: int, k: ShiftTuple, p: GzPattern, g):
    """Residuals (a - composed a, b - composed b)."""
    return (
        coeff_a(i, j, k, p, g) - coeff_a_composed(i, j, k, p, g),
        coeff_b(i, j, k, p, g) - coeff_b_composed(i, j, k, p, g),
    )


# -- random sampling -------------------------------------------------------

def random_rational(rng, max_num: int = 40, max_den: int = 7) -> Fraction:
    return Fraction(int(rng.integers(-max_num, max_num + 1)), int(rng.integers(1, max_den + 1)))


def random_rational_pattern(n: int, rng, max_num: int = 40, max_den: int = 7) -> GzPattern:
    """Pattern with independent small-denominator rational entries (row n included)."""
    rows = tuple(
        tuple(random_rational(rng, max_num, max_den) for _ in range(i)) for i in range(1, n + 1)
    )
    return GzPattern(rows)

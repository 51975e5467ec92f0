import cmath
import math
from itertools import permutations

import pytest

from sutherland_mb.errors import CoincidentCoordinates, GridTooCoarse
from sutherland_mb.oracles import phi_n2_closed
from sutherland_mb.quadrature import (
    DENSE_NODE_LIMIT,
    GridSpec,
    PhiIntegral,
    QmcPhiIntegral,
    eval_phi,
    eval_psi,
    gauge_factor,
    refine_until,
    spectral_imag_parts,
)

LAM2 = (0.8j, -0.8j)
LAM3 = (0.5j, -0.2j, 0.9j)
X3 = (0.7, 0.1, -0.6)
# baseline from the first convergence run of refine_until(LAM3, 0.5, X3, 1e-6) on the default grid
N3_REFINE_NODES = 387_420_489


# -- grid ------------------------------------------------------------------------

def test_gridspec_validation():
    GridSpec(2.0, 0.25, 0)
    for args in [(2.1, 0.25), (1.75, 0.25), (0.0, 0.25), (2.0, -0.25)]:
        with pytest.raises(ValueError):
            GridSpec(*args)
    with pytest.raises(ValueError):
        GridSpec(2.0, 0.25, -1)


def test_gridspec_for_tolerance():
    spec = GridSpec.for_tolerance(2, 1e-8)
    t = 2 / math.pi * (math.log(1e8) + 10)
    assert spec.step == 0.25 and t <= spec.half_width < t + 0.25
    assert spec.steps() == [0.25, 0.125]
    assert spec.nodes(1) == 2 * spec.half_count * 2 + 1
    assert spec.nodes(2, 0) == (2 * spec.half_count + 1) ** 2
    with pytest.raises(ValueError):
        GridSpec.for_tolerance(2, 0)


def test_spectral_parameters_must_be_imaginary():
    assert list(spectral_imag_parts([0.5j, -1j])) == [0.5, -1.0]
    with pytest.raises(ValueError):
        spectral_imag_parts([0.5 + 0.1j, 1j])
    with pytest.raises(ValueError):
        spectral_imag_parts([])


# -- basic values ------------------------------------------------------------------

@pytest.mark.parametrize("x", [-1.3, 0.0, 2.2])
def test_n1_exact(x):
    r = eval_phi([0.7j], 1.3, [x])
    assert r.value == cmath.exp(0.7j * x)
    assert r.error_estimate == 0 and r.nodes == 1


def test_n2_matches_closed_form():
    r = eval_phi(LAM2, 0.75, [0.6, -0.6], tol=1e-8)
    ref = phi_n2_closed(*LAM2, 0.75, 0.6, -0.6)
    assert abs(r.value / ref - 1) < 1e-8
    assert r.nodes >= GridSpec.for_tolerance(2, 1e-8).nodes(1)


def test_n2_origin_lambda_swap():
    a = eval_phi(LAM2, 0.75, [0.0, 0.0]).value
    b = eval_phi(LAM2[::-1], 0.75, [0.0, 0.0]).value
    assert abs(a) > 1 and abs(a - b) < 1e-12 * abs(a)


def test_psi_gauge():
    x = [0.9, -0.4]
    phi = eval_phi(LAM2, 0.75, x).value
    psi = eval_psi(LAM2, 0.75, x).value
    assert psi == pytest.approx(abs(math.sinh(1.3)) ** 0.75 * phi, rel=1e-15)
    with pytest.raises(CoincidentCoordinates):
        eval_psi(LAM2, 0.75, [0.3, 0.3])
    with pytest.raises(CoincidentCoordinates):
        gauge_factor([0.1, 0.2, 0.1], 0.5)


def test_psi_method_matches_function():
    integral = PhiIntegral(LAM3, 0.5, GridSpec(8.0, 0.25, 1))
    assert integral.psi(X3).value == pytest.approx(gauge_factor(X3, 0.5) * integral(X3).value, rel=1e-15)


def test_wrong_shapes_rejected():
    integral = PhiIntegral(LAM2, 0.75, GridSpec(4.0, 0.5, 0))
    with pytest.raises(ValueError):
        integral([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        PhiIntegral(LAM2, 0.0)


# -- refinement --------------------------------------------------------------------

def test_refine_until_n2_within_four_levels():
    r = refine_until(LAM2, 0.75, [0.6, -0.6], 1e-10)
    assert r.level <= 4
    assert abs(r.value / phi_n2_closed(*LAM2, 0.75, 0.6, -0.6) - 1) < 1e-10


def test_refine_until_n1_level0():
    r = refine_until([1.1j], 0.5, [0.3], 1e-12)
    assert r.level == 0 and r.value == cmath.exp(1.1j * 0.3)


def test_refine_until_n3_node_baseline():
    r = refine_until(LAM3, 0.5, X3, 1e-6)
    assert r.error_estimate / abs(r.value) < 1e-6
    assert r.nodes <= N3_REFINE_NODES


def test_refine_until_gives_up():
    with pytest.raises(GridTooCoarse):
        refine_until(LAM2, 0.75, [0.6, -0.6], 1e-14, max_levels=1, grid=GridSpec(8.0, 1.0, 0))
    with pytest.raises(ValueError):
        refine_until(LAM2, 0.75, [0.6, -0.6], 0.0)


def test_eval_phi_tolerance_check():
    with pytest.raises(GridTooCoarse):
        eval_phi(LAM2, 0.75, [0.6, -0.6], GridSpec(8.0, 1.0, 1), tol=1e-12, max_levels=0)
    r = eval_phi(LAM2, 0.75, [0.6, -0.6], GridSpec(8.0, 1.0, 1), tol=1e-9, max_levels=3)
    assert r.error_estimate < 1e-9 * abs(r.value) and r.level >= 2


def test_trapezoid_convergence():
    for lam, g, x in ((LAM2, 0.75, [0.6, -0.6]), (LAM3, 0.5, X3)):
        integral = PhiIntegral(lam, g, GridSpec(16.0, 1.0, 3))
        vals = integral.level_values(x)
        errs = [abs(v - vals[-1]) for v in vals[:-1]]
        for a, b in zip(errs, errs[1:]):
            assert a >= 4 * b


def test_companion_grid_error_estimate():
    integral = PhiIntegral(LAM2, 0.75, GridSpec(12.0, 0.25, 0))
    r = integral([0.6, -0.6])
    true_err = abs(r.value - phi_n2_closed(*LAM2, 0.75, 0.6, -0.6))
    assert r.level == 0 and r.error_estimate >= true_err


def test_dense_limit():
    with pytest.raises(GridTooCoarse):
        PhiIntegral((0.1j, 0.2j, 0.3j, 0.4j), 1.0, GridSpec(100.0, 0.25, 0))
    assert DENSE_NODE_LIMIT >= 10**9


# -- symmetries ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def n3_integral():
    return PhiIntegral(LAM3, 0.5, tol=1e-8)


def test_x_permutation_n2():
    integral = PhiIntegral(LAM2, 0.75, tol=1e-8)
    a, b = integral([0.9, -0.2]).value, integral([-0.2, 0.9]).value
    assert abs(a - b) < 1e-7 * abs(a)


def test_x_permutation_n3(n3_integral):
    base = n3_integral(X3).value
    for perm in permutations(range(3)):
        other = n3_integral([X3[i] for i in perm]).value
        assert abs(other - base) < 1e-7 * abs(base)


def test_lambda_permutation_n3():
    grid = GridSpec(10.0, 0.25, 0)
    base = PhiIntegral(LAM3, 0.5, grid)(X3).value
    for perm in [(1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        other = PhiIntegral([LAM3[i] for i in perm], 0.5, grid)(X3).value
        assert abs(other - base) < 1e-10 * abs(base)


@pytest.mark.parametrize("lam,x", [(LAM2, [0.9, -0.2]), (LAM3, X3)])
def test_conjugation(lam, x):
    # with d gamma = i dt the integral carries i^d, so conj(Phi_l) = (-1)^d Phi_{-l}
    d = len(lam) * (len(lam) - 1) // 2
    grid = GridSpec(10.0, 0.25, 0)
    a = PhiIntegral(lam, 0.75, grid)(x).value / 1j**d
    b = PhiIntegral([-v for v in lam], 0.75, grid)(x).value / 1j**d
    assert abs(a.conjugate() - b) < 1e-12 * abs(a)


def test_determinism_across_threads():
    grid = GridSpec(8.0, 0.125, 1)
    one = PhiIntegral(LAM3, 0.5, grid, threads=1)(X3)
    again = PhiIntegral(LAM3, 0.5, grid, threads=1)(X3)
    many = PhiIntegral(LAM3, 0.5, grid, threads=4)(X3)
    every = PhiIntegral(LAM3, 0.5, grid, threads=0)(X3)
    assert one == again == many == every


# -- quasi-Monte Carlo ----------------------------------------------------------------

def test_qmc_n1():
    r = QmcPhiIntegral([0.4j], 1.0)([1.5])
    assert r.value == cmath.exp(0.4j * 1.5)


def test_qmc_against_dense_n3(n3_integral):
    qmc = QmcPhiIntegral(LAM3, 0.5, points=2**13, replicas=8, seed=3)
    for x in ([0.0, 0.0, 0.0], [0.2, 0.1, -0.15]):
        ref = n3_integral(x).value
        r = qmc(x)
        assert abs(r.value - ref) < max(5 * r.error_estimate, 1e-3 * abs(ref))
        assert r.error_estimate < 0.02 * abs(ref)


def test_qmc_seed_reproducible():
    a = QmcPhiIntegral(LAM3, 0.5, points=2**10, seed=5)([0.1, 0.0, -0.1])
    b = QmcPhiIntegral(LAM3, 0.5, points=2**10, seed=5)([0.1, 0.0, -0.1])
    assert a == b


def test_qmc_without_adaptation(n3_integral):
    r = QmcPhiIntegral(LAM3, 0.5, points=2**13, adapt=False, seed=1)([0.0, 0.0, 0.0])
    ref = n3_integral([0.0, 0.0, 0.0]).value
    assert abs(r.value - ref) < max(5 * r.error_estimate, 1e-3 * abs(ref))


@pytest.mark.parametrize("kw", [{"replicas": 1}, {"core": 0.0}, {"defensive": 0.0}, {"defensive": 1.5}])
def test_qmc_parameter_validation(kw):
    with pytest.raises(ValueError):
        QmcPhiIntegral(LAM3, 0.5, points=2**8, **kw)

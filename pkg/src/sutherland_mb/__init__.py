"""Mellin-Barnes integral representation of Sutherland wave functions.

Modules:

* ``special``: principal-branch complex log-Gamma.
* ``gz``: Gelfand-Zetlin patterns, the difference-operator gl(n) action and
  its exact identities.
* ``kernel``: the Gamma-product kernel in log space.
* ``quadrature``: Phi and Psi by trapezoid on the imaginary contour, plus a
  quasi-Monte Carlo mode for larger n.
* ``oracles``: closed-form n = 2 values, finite-difference Hamiltonians and
  the g = 1/2 kernel comparison.
* ``verify``: the identity suite behind ``sutherland verify``.
"""

from .errors import (
    CoincidentCoordinates,
    DenominatorZero,
    Divergence,
    GridTooCoarse,
    InvalidRange,
    KernelZero,
    PoleError,
    SingularParameter,
    StencilTooWide,
    SutherlandError,
)
from .gz import (
    GzPattern,
    ShiftTuple,
    apply_generator,
    coeff_a,
    coeff_b,
    coeff_c,
    enumerate_shift_tuples,
    laplace1_apply,
    laplace2_apply,
    laplace2_eigenvalue,
    verify_ab_shift,
    verify_composition,
    verify_lemma2,
    verify_lemma3,
    weight_h,
)
from .kernel import KernelLogValue, decay_envelope, log_kernel, verify_lemma4
from .oracles import (
    gauss_2f1,
    g_half_kernel_consistency,
    hamiltonian_residual,
    phi_n2_closed,
    sl2_phi,
)
from .quadrature import (
    GridSpec,
    PhiIntegral,
    QmcPhiIntegral,
    QuadratureResult,
    eval_phi,
    eval_psi,
    refine_until,
)
from .special import log_gamma, log_gamma_ratio

__version__ = "0.1.0"

__all__ = [
    "CoincidentCoordinates",
    "DenominatorZero",
    "Divergence",
    "GridTooCoarse",
    "InvalidRange",
    "KernelZero",
    "PoleError",
    "SingularParameter",
    "StencilTooWide",
    "SutherlandError",
    "GzPattern",
    "ShiftTuple",
    "apply_generator",
    "coeff_a",
    "coeff_b",
    "coeff_c",
    "enumerate_shift_tuples",
    "laplace1_apply",
    "laplace2_apply",
    "laplace2_eigenvalue",
    "verify_ab_shift",
    "verify_composition",
    "verify_lemma2",
    "verify_lemma3",
    "weight_h",
    "KernelLogValue",
    "decay_envelope",
    "log_kernel",
    "verify_lemma4",
    "gauss_2f1",
    "g_half_kernel_consistency",
    "hamiltonian_residual",
    "phi_n2_closed",
    "sl2_phi",
    "GridSpec",
    "PhiIntegral",
    "QmcPhiIntegral",
    "QuadratureResult",
    "eval_phi",
    "eval_psi",
    "refine_until",
    "log_gamma",
    "log_gamma_ratio",
]

"""Determinants of discrete Schrodinger-type operators -Delta_d + V.

The package computes them three ways and makes the ways fight:

  * forward sweep recursions (bounded and growing matrix forms) costing
    O(N K^3) instead of the O((N K)^3) of a dense factorization,
  * exact oracles for the separable 2D operator (dense factorization,
    eigenvalue product, transverse sinh product), and
  * large-lattice asymptotic formulas for the 2D massive and massless
    operators, with all their special constants and quadratures.

A continuum companion solves the corresponding initial value problems for
regularized determinant ratios in one dimension and in a truncated
sine-mode basis.  The `gydet` CLI exposes single determinants (JSON),
asymptotic breakdowns (JSON), scaling benchmarks (CSV), and the
cross-method verification suite.
"""

from .errors import (
    GydetError,
    NonConvergentTruncation,
    NonFiniteRecursion,
    PotentialFileError,
    QuadratureError,
    SignChange,
    SingularCrossing,
    SingularMatrix,
    SizeCapExceeded,
)
from .lattice import (
    DENSE_CAP,
    LatticeSpec,
    PotentialField,
    apply_hamiltonian,
    build_interior_hamiltonian,
    transverse_eigenvalues,
    transverse_laplacian,
    transverse_slice,
)
from .logdet import Diagnostics, LogDet, dense_logdet
from .gy import (
    GYState,
    matrix_gy_states,
    matrix_logdet_aform,
    matrix_logdet_yform,
    matrix_y_states,
    scalar_logdet,
    scalar_y_solution,
)
from .oracles import (
    GammaValue,
    eigenproduct_logdet_2d,
    gamma_k,
    log_sinh,
    sinh_product_logdet,
)
from .asymptotics import (
    CATALAN,
    AsymptoticBreakdown,
    MassiveCorrectionParams,
    catalan,
    euler_product_P,
    g_of_m,
    massive_asymptotic_logdet,
    massless_asymptotic_logdet,
    quad_I1,
    quad_I2,
    s2_massive_correction,
)
from .continuum import (
    Potential1D,
    RatioResult,
    TransversePotential2D,
    ratio_logdet_1d,
    ratio_logdet_1d_riccati,
    ratio_logdet_2d_truncated,
    v_matrix_elements,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticBreakdown",
    "CATALAN",
    "DENSE_CAP",
    "Diagnostics",
    "GammaValue",
    "GYState",
    "GydetError",
    "LatticeSpec",
    "LogDet",
    "MassiveCorrectionParams",
    "NonConvergentTruncation",
    "NonFiniteRecursion",
    "Potential1D",
    "PotentialField",
    "PotentialFileError",
    "QuadratureError",
    "RatioResult",
    "SignChange",
    "SingularCrossing",
    "SingularMatrix",
    "SizeCapExceeded",
    "TransversePotential2D",
    "apply_hamiltonian",
    "build_interior_hamiltonian",
    "catalan",
    "dense_logdet",
    "eigenproduct_logdet_2d",
    "euler_product_P",
    "g_of_m",
    "gamma_k",
    "log_sinh",
    "massive_asymptotic_logdet",
    "massless_asymptotic_logdet",
    "matrix_gy_states",
    "matrix_logdet_aform",
    "matrix_logdet_yform",
    "matrix_y_states",
    "quad_I1",
    "quad_I2",
    "ratio_logdet_1d",
    "ratio_logdet_1d_riccati",
    "ratio_logdet_2d_truncated",
    "s2_massive_correction",
    "scalar_logdet",
    "scalar_y_solution",
    "sinh_product_logdet",
    "transverse_eigenvalues",
    "transverse_laplacian",
    "transverse_slice",
    "v_matrix_elements",
]

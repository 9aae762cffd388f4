"""Evaluation and numerical verification tools for the p-k-Hessian operator

    F_{k,p}[u] = sigma_k(D(|Du|^{p-2} Du)).
"""

from .hessop import (
    EvalPoint,
    NotAdmissibleError,
    ZeroGradientError,
    admissibility_check,
    critical_exponents,
    flux_jacobian,
    pk_hessian_at_point,
)
from .radial import FamilyFailsError, RadialProfile, SupersolutionParams, supersolution_constant, supersolution_scan
from .symfun import sigma_gradient, sigma_of_matrix, sigma_of_vector

__version__ = "0.1.0"

__all__ = [
    "EvalPoint",
    "FamilyFailsError",
    "NotAdmissibleError",
    "RadialProfile",
    "SupersolutionParams",
    "ZeroGradientError",
    "admissibility_check",
    "critical_exponents",
    "flux_jacobian",
    "pk_hessian_at_point",
    "sigma_gradient",
    "sigma_of_matrix",
    "sigma_of_vector",
    "supersolution_constant",
    "supersolution_scan",
]

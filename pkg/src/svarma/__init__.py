"""Exact conditional likelihood, gradient and calibration for VARMA models
whose moving-average coefficients are scalars."""
from .calibrate import FitOptions, FitResult, fit, seed_grid, select_order
from .gradient import grad_profile_loglik
from .kernel import build_kernel, build_lambda, build_sigma, log_det_kbar, szego_limit
from .likelihood import (LikelihoodReport, RegressorSet, VarmaSpec, conditional_loglik,
                         optimal_omega, optimal_regression, profile_loglik)
from .roots import canonicalize, invert_roots, is_invertible, roots_of
from .simulate import (MatrixVarma, NoiseConfig, matrix_to_scalar, simulate_matrix_varma,
                       simulate_varma)

__version__ = "0.1.0"

__all__ = [
    "FitOptions", "FitResult", "fit", "seed_grid", "select_order",
    "grad_profile_loglik",
    "build_kernel", "build_lambda", "build_sigma", "log_det_kbar", "szego_limit",
    "LikelihoodReport", "RegressorSet", "VarmaSpec", "conditional_loglik",
    "optimal_omega", "optimal_regression", "profile_loglik",
    "canonicalize", "invert_roots", "is_invertible", "roots_of",
    "MatrixVarma", "NoiseConfig", "matrix_to_scalar", "simulate_matrix_varma",
    "simulate_varma",
]

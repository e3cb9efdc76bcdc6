"""User-facing fast structured operations."""

from .cauchy import (CauchyLikeOperand, RouteReport, cached_cv_hss, cauchy_any_knots_matvec,
                     cauchy_any_knots_solve, cauchy_like_hss, cauchy_like_matvec, cauchy_like_solve,
                     clear_cache, cv_matvec, cv_solve, rational_eval, rational_interpolate, reknot_plan)
from .logkernel import log_kernel_eval_from_roots, log_kernel_sum
from .mobius import (MobiusImage, choose_pole, detect_curve, mobius_circle_to_real,
                     mobius_line_to_real)
from .polynomial import Polynomial, poly_interpolate, poly_multipoint_eval
from .toeplitz import toeplitz_like_solve, toeplitz_solve
from .vandermonde import (choose_rotation, vandermonde_matvec, vandermonde_solve,
                          vandermonde_transposed_matvec, vandermonde_transposed_solve)

__all__ = [
    "CauchyLikeOperand", "MobiusImage", "Polynomial", "RouteReport", "cached_cv_hss",
    "cauchy_any_knots_matvec", "cauchy_any_knots_solve", "cauchy_like_hss", "cauchy_like_matvec",
    "cauchy_like_solve", "choose_pole", "choose_rotation", "clear_cache", "cv_matvec", "cv_solve",
    "detect_curve", "log_kernel_eval_from_roots", "log_kernel_sum", "mobius_circle_to_real",
    "mobius_line_to_real", "poly_interpolate", "poly_multipoint_eval", "rational_eval",
    "rational_interpolate", "reknot_plan", "toeplitz_like_solve", "toeplitz_solve",
    "vandermonde_matvec", "vandermonde_solve", "vandermonde_transposed_matvec",
    "vandermonde_transposed_solve",
]

"""Structured-matrix computations: displacement generators, structure maps,
compressed Cauchy approximations and fast solvers built on them."""

from .core import (circulant_matvec, dense_solve, dft, f_circulant_matvec, idft, root_of_unity,
                   toeplitz_matvec, unity_powers)
from .displacement import (DisplacementGenerator, OperatorDescriptor, cauchy_generator,
                           generator_from_dense, generator_inverse, generator_matvec,
                           generator_product, generator_rmatvec, recover_dense, toeplitz_generator,
                           vandermonde_generator)
from .estimators import CauchyCompressor, ToeplitzSolver, VandermondeEvaluator
from .exceptions import (AmplificationError, IllConditionedError, InputError, KnotCollisionError,
                         NumericalError, SingularMatrixError, SingularOperatorError, StructMatError)
from .hss import (HssApprox, LowRankBlock, SeparationCertificate, build_cv_hss, hss_matvec, hss_solve,
                  rank_bound, real_line_hss, sector_partition, separation, taylor_low_rank)
from .knots import KnotSet
from .solvers import *  # noqa: F401,F403
from .solvers import __all__ as _solver_names
from .transforms import apply_map, compose_transform

__version__ = "0.1.0"

__all__ = [
    "AmplificationError", "CauchyCompressor", "DisplacementGenerator", "HssApprox",
    "IllConditionedError", "InputError", "KnotCollisionError", "KnotSet", "LowRankBlock",
    "NumericalError", "OperatorDescriptor", "SeparationCertificate", "SingularMatrixError",
    "SingularOperatorError", "StructMatError", "ToeplitzSolver", "VandermondeEvaluator",
    "apply_map", "build_cv_hss", "cauchy_generator", "circulant_matvec", "compose_transform",
    "dense_solve", "dft", "f_circulant_matvec", "generator_from_dense", "generator_inverse",
    "generator_matvec", "generator_product", "generator_rmatvec", "hss_matvec", "hss_solve", "idft",
    "rank_bound", "real_line_hss", "recover_dense", "root_of_unity", "sector_partition",
    "separation", "taylor_low_rank", "toeplitz_generator", "toeplitz_matvec", "unity_powers",
    "vandermonde_generator",
] + list(_solver_names)

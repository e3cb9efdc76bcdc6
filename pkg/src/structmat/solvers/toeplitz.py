"""Superfast Toeplitz and Toeplitz-like solves.

A ``(Z_1, Z_-1)`` generator of ``T`` is mapped to the Cauchy-like matrix
``C = Omega T D0^H Omega^H`` whose knots are the ``n``-th roots of unity and
their half-step rotation.  ``C`` is solved through its compressed form and
the quasiunitary multipliers are undone with two FFTs.
"""

import numpy as np

from .._validation import as_vector, check_epsilon
from ..core import toeplitz_matvec
from ..displacement import DisplacementGenerator, generator_matvec, operator_shift_adjust, toeplitz_generator
from ..exceptions import ClassMismatchError, DimensionError, InvalidToleranceError
from ..transforms import cauchy_to_toeplitz_dft_solution, toeplitz_to_cauchy_dft
from .cauchy import CauchyLikeOperand, cauchy_like_solve


def _solve_pipeline(gen, b, eps, matvec, refine):
    n = gen.n
    if n == 1:
        a = matvec(np.ones(1, dtype=np.complex128))
        return b / a
    cg = toeplitz_to_cauchy_dft(gen)
    M = CauchyLikeOperand(cg.A.knots, cg.B.knots, cg.F, cg.G)

    def solve(rhs):
        y = cauchy_like_solve(M, np.fft.ifft(rhs) * n, eps)
        return cauchy_to_toeplitz_dft_solution(y)

    x = solve(b)
    for _ in range(refine):
        x = x + solve(b - matvec(x))
    return x


def toeplitz_like_solve(gen, b, epsilon, refine=2):
    """Solve ``M x = b`` for ``M`` given by a Toeplitz-like generator.

    ``gen`` must be under a pair of shift operators ``(Z_e, Z_f)``; other
    parameters are moved to ``(1, -1)`` first (one extra column each).
    ``refine`` steps of iterative refinement use the exact generator product.
    """
    if not isinstance(gen, DisplacementGenerator) or gen.pattern != "t":
        raise ClassMismatchError("toeplitz_like_solve needs a (Z_e, Z_f) generator")
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    b = as_vector(b, "b")
    if b.shape[0] != gen.n:
        raise DimensionError(f"b has length {b.shape[0]}, expected {gen.n}")
    orig = gen
    e, f = gen.A.param, gen.B.param
    # each intermediate pair must keep e != f
    if f == 1 and e == -1:
        steps = [("right", 1j), ("left", 1), ("right", -1)]
    elif f == 1:
        steps = [("right", -1), ("left", 1)]
    else:
        steps = [("left", 1), ("right", -1)]
    for side, value in steps:
        gen = operator_shift_adjust(gen, value, side=side)
    return _solve_pipeline(gen, b, eps, lambda x: generator_matvec(orig, x), refine)


def toeplitz_solve(first_col, first_row, b, epsilon, refine=2):
    """Solve ``T x = b`` for the Toeplitz matrix with the given first column and row.

    Parameters
    ----------
    first_col, first_row : array_like
        ``T[i, 0]`` and ``T[0, j]``; the first entries must agree.
    b : array_like
    epsilon : float
        Entrywise tolerance of the compressed Cauchy-like form.
    refine : int
        Refinement steps against the exact FFT product with ``T``.

    Raises
    ------
    SingularMatrixError, IllConditionedError
        When ``T`` is singular or too ill-conditioned for ``epsilon``.

    Examples
    --------
    >>> x = toeplitz_solve([2, 1, 0, 0], [2, 1, 0, 0], [3, 4, 4, 3], 1e-8)
    >>> np.round(x.real, 8).tolist()
    [1.0, 1.0, 1.0, 1.0]
    """
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    c = as_vector(first_col, "first_col")
    r = as_vector(first_row, "first_row")
    b = as_vector(b, "b")
    if b.shape[0] != c.shape[0]:
        raise DimensionError(f"b has length {b.shape[0]}, expected {c.shape[0]}")
    gen = toeplitz_generator(c, r, 1, -1)
    return _solve_pipeline(gen, b, eps, lambda x: toeplitz_matvec(c, r, x), refine)

import numpy as np
import pytest

from structmat.core import dense_toeplitz, toeplitz_matvec
from structmat.displacement import toeplitz_generator, recover_dense
from structmat.exceptions import ClassMismatchError, NumericalError, SingularMatrixError
from structmat.sampling import dominant_toeplitz, singular_toeplitz
from structmat.solvers import toeplitz_like_solve, toeplitz_solve

from helpers import crandn, rel


def test_identity(rng):
    n = 64
    e = np.zeros(n)
    e[0] = 1
    b = crandn(rng, n)
    assert np.allclose(toeplitz_solve(e, e, b, 1e-8), b, atol=1e-13)


def test_small_example():
    x = toeplitz_solve([2, 1, 0, 0], [2, 1, 0, 0], [3, 4, 4, 3], 1e-8)
    assert np.allclose(x, 1, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 7, 64, 100])
def test_small_sizes(rng, n):
    col, row = crandn(rng, n), crandn(rng, n)
    col[0] = row[0] = 3 * n
    x = crandn(rng, n)
    b = toeplitz_matvec(col, row, x)
    assert rel(toeplitz_solve(col, row, b, 1e-10), x) <= 1e-8


def test_dominant_512(rng):
    n = 512
    col, row = dominant_toeplitz(n, rng)
    x = crandn(rng, n)
    b = dense_toeplitz(col, row) @ x
    assert rel(toeplitz_solve(col, row, b, 1e-8), x) <= 1e-5


def test_nonsymmetric(rng):
    n = 300
    col, row = dominant_toeplitz(n, rng, symmetric=False)
    x = crandn(rng, n)
    b = toeplitz_matvec(col, row, x)
    assert rel(toeplitz_solve(col, row, b, 1e-8), x) <= 1e-5


def test_singular_raises():
    col, row = singular_toeplitz(64, 0)
    with pytest.raises(SingularMatrixError):
        toeplitz_solve(col, row, np.ones(64), 1e-8)


def test_ill_conditioned_fails_closed():
    # Kac-Murdock-Szego with rho near 1 is badly conditioned
    n = 256
    col = 0.99999 ** np.arange(n)
    with pytest.raises(NumericalError):
        toeplitz_solve(col, col, np.ones(n), 1e-8)


@pytest.mark.parametrize("e,f", [(1, -1), (0, 1), (2, 0.5j), (-1, 1), (1, 1j)])
def test_toeplitz_like(rng, e, f):
    n = 128
    col, row = dominant_toeplitz(n, rng, symmetric=False)
    gen = toeplitz_generator(col, row, e, f)
    x = crandn(rng, n)
    b = recover_dense(gen) @ x
    assert rel(toeplitz_like_solve(gen, b, 1e-9), x) <= 1e-6


def test_toeplitz_like_wrong_class():
    from structmat.displacement import cauchy_generator
    gen = cauchy_generator(np.arange(4) + 0.5, -np.arange(4) - 1.0)
    with pytest.raises(ClassMismatchError):
        toeplitz_like_solve(gen, np.ones(4), 1e-8)

import numpy as np
import pytest

from structmat.core import dense_cauchy
from structmat.exceptions import IllConditionedError, SingularMatrixError
from structmat.hodlr import HodlrMatrix, aca

from helpers import crandn, rel


def kernel(n, rng):
    s = 1.0 * np.exp(2j * np.pi * (np.arange(n) + rng.uniform(0.3, 0.7, n)) / n)
    t = np.exp(2j * np.pi * np.arange(n) / n)
    C = dense_cauchy(s, t)
    return C, lambda i, j: C[np.ix_(i, j)]


def test_aca_low_rank_block(rng):
    U0, V0 = crandn(rng, 80, 4), crandn(rng, 70, 4)
    A = U0 @ V0.T
    U, V = aca(lambda i, j: A[np.ix_(i, j)], np.arange(80), np.arange(70), 1e-12)
    assert U.shape[1] == 4
    assert np.abs(U @ V.T - A).max() <= 1e-10 * np.abs(A).max()


def test_aca_zero_block():
    U, V = aca(lambda i, j: np.zeros((len(i), len(j))), np.arange(5), np.arange(6), 1e-10)
    assert U.shape[1] == 0


def test_matvec_and_solve(rng):
    C, entry = kernel(300, rng)
    H = HodlrMatrix(entry, 300, 1e-12, leaf_size=32)
    x = crandn(rng, 300)
    assert rel(H.matvec(x), C @ x) <= 1e-10
    assert rel(H.solve(C @ x), x) <= 1e-8
    assert rel(H.transpose().matvec(x), C.T @ x) <= 1e-10
    assert rel(H.transpose().solve(C.T @ x), x) <= 1e-8
    assert all(r12 <= 64 and r21 <= 64 for _, r12, r21 in H.ranks())


def test_singular_pivot():
    A = np.ones((8, 8))
    H = HodlrMatrix(lambda i, j: A[np.ix_(i, j)], 8, 1e-10, leaf_size=8)
    with pytest.raises(SingularMatrixError):
        H.factor()


def test_ill_conditioned_pivot(rng):
    A = np.diag(np.r_[np.ones(7), 1e-9]).astype(complex)
    H = HodlrMatrix(lambda i, j: A[np.ix_(i, j)], 8, 1e-10, leaf_size=8, cond_limit=1e6)
    with pytest.raises(IllConditionedError):
        H.factor()

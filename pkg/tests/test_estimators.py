import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from structmat.core import dense_cauchy, dense_toeplitz, dense_vandermonde
from structmat.estimators import CauchyCompressor, ToeplitzSolver, VandermondeEvaluator
from structmat.exceptions import DimensionError
from structmat.sampling import dominant_toeplitz, sample_knots

from helpers import crandn, rel


def grid(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


@pytest.mark.parametrize("est", [CauchyCompressor(epsilon=1e-6, e=2.0), VandermondeEvaluator(epsilon=1e-9),
                                 ToeplitzSolver(epsilon=1e-7, refine=1)])
def test_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    twin.set_params(epsilon=1e-4)
    assert twin.epsilon == 1e-4 and est.epsilon == params["epsilon"]


def test_unfitted_raises():
    for est in (CauchyCompressor(), VandermondeEvaluator(), ToeplitzSolver()):
        with pytest.raises(NotFittedError):
            (est.transform if hasattr(est, "transform") else est.predict)(np.ones(4))


def test_cauchy_compressor(rng):
    n = 256
    s = sample_knots("circle", n, rng)
    comp = CauchyCompressor(epsilon=1e-8).fit(s.reshape(-1, 1))
    assert comp.max_rank_ > 0 and comp.n_levels_ >= 1
    C = dense_cauchy(s, grid(n))
    U = crandn(rng, n, 2)
    assert np.abs(comp.transform(U) - C @ U).max() <= n * 1e-8 * np.abs(U).max()
    x = crandn(rng, n)
    assert rel(comp.inverse_transform(C @ x), x) <= 1e-5
    assert comp.dump().startswith("level sector rows cols rank theta delta bound")
    with pytest.raises(DimensionError):
        comp.transform(np.ones(n + 1))


def test_vandermonde_evaluator(rng):
    n = 128
    s = sample_knots("perturbed", n, rng)
    coef = crandn(rng, n)
    y = dense_vandermonde(s) @ coef
    reg = VandermondeEvaluator(epsilon=1e-10).fit(s, y)
    assert np.abs(reg.coef_ - coef).max() <= 1e-6 * np.abs(coef).max()
    x = sample_knots("circle", 50, rng)
    assert rel(reg.predict(x), reg.polynomial_(x)) <= 1e-8
    assert reg.score(s, y) >= -1e-8


def test_toeplitz_solver(rng):
    n = 256
    col, row = dominant_toeplitz(n, rng, symmetric=False)
    T = dense_toeplitz(col, row)
    solver = ToeplitzSolver(epsilon=1e-8).fit(col, row)
    x = crandn(rng, n)
    assert rel(solver.predict(T @ x), x) <= 1e-5
    assert rel(solver.transform(x), T @ x) <= 1e-13
    sym = ToeplitzSolver().fit(col)
    assert rel(sym.transform(x), dense_toeplitz(col, col) @ x) <= 1e-13

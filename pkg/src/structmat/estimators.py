"""scikit-learn style wrappers over the functional API.

The estimators hold parameters only in ``__init__`` and learned state in
attributes with a trailing underscore, so ``get_params``/``set_params``,
``clone`` and pipelines work as usual.  Inputs are complex, which
``sklearn.utils.check_array`` rejects, so validation goes through the
package's own helpers.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_vector, check_epsilon
from .core import toeplitz_matvec
from .exceptions import DimensionError
from .knots import KnotSet
from .solvers import (cached_cv_hss, cv_solve, poly_interpolate, poly_multipoint_eval,
                      toeplitz_solve)


def _knot_input(X, name="X"):
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    return as_vector(X, name)


def _columns(U, n, name="U"):
    """``U`` as an ``(n, k)`` complex array plus whether it was 1-D."""
    U = np.asarray(U, dtype=np.complex128)
    flat = U.ndim == 1
    U2 = U.reshape(-1, 1) if flat else U
    if U2.ndim != 2 or U2.shape[0] != n:
        raise DimensionError(f"{name} must have {n} rows, got shape {U.shape}")
    if not np.all(np.isfinite(U2)):
        raise DimensionError(f"{name} has non-finite entries")
    return U2, flat


def _per_column(fn, U2, flat):
    out = np.column_stack([fn(U2[:, k]) for k in range(U2.shape[1])])
    return out[:, 0] if flat else out


class CauchyCompressor(TransformerMixin, BaseEstimator):
    """Compressed CV matrix ``C_{s, e omega}`` learned from the row knots.

    Parameters
    ----------
    epsilon : float
        Entrywise approximation tolerance.
    e : complex
        Scale of the column grid ``e omega_n**j``.

    Attributes
    ----------
    hss_ : HssApprox
    knots_ : ndarray
    max_rank_ : int
    n_levels_ : int

    Examples
    --------
    >>> s = np.exp(2j * np.pi * (np.arange(64) + 0.5) / 64)
    >>> comp = CauchyCompressor(epsilon=1e-10).fit(s)
    >>> comp.transform(np.ones(64)).shape
    (64,)
    """

    def __init__(self, epsilon=1e-8, e=1.0):
        self.epsilon = epsilon
        self.e = e

    def fit(self, X, y=None):
        s = _knot_input(X)
        check_epsilon(self.epsilon)
        self.knots_ = s
        self.hss_ = cached_cv_hss(KnotSet(s), self.e, self.epsilon)
        self.max_rank_ = self.hss_.rho
        self.n_levels_ = len(self.hss_.levels)
        return self

    def transform(self, X):
        """``C X`` column by column."""
        check_is_fitted(self, "hss_")
        U2, flat = _columns(X, self.hss_.shape[1], "X")
        return _per_column(self.hss_.matvec, U2, flat)

    def inverse_transform(self, X):
        """``C^{-1} X`` column by column."""
        check_is_fitted(self, "hss_")
        U2, flat = _columns(X, self.hss_.shape[0], "X")
        return _per_column(lambda b: cv_solve(self.knots_, self.e, b, self.epsilon), U2, flat)

    def dump(self):
        check_is_fitted(self, "hss_")
        return self.hss_.dump()


class VandermondeEvaluator(RegressorMixin, BaseEstimator):
    """Polynomial interpolant fitted at knots and evaluated fast elsewhere.

    ``fit(X, y)`` interpolates ``y`` at the knots ``X`` (degree ``< len(X)``);
    ``predict(X)`` evaluates the polynomial at new knots.

    Parameters
    ----------
    epsilon : float

    Attributes
    ----------
    coef_ : ndarray
        Ascending coefficients.
    """

    def __init__(self, epsilon=1e-8):
        self.epsilon = epsilon

    def fit(self, X, y):
        s = _knot_input(X)
        v = as_vector(y, "y")
        if v.shape[0] != s.shape[0]:
            raise DimensionError(f"y has length {v.shape[0]}, expected {s.shape[0]}")
        self.polynomial_ = poly_interpolate(s, v, self.epsilon)
        self.coef_ = self.polynomial_.coef
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return poly_multipoint_eval(self.polynomial_, _knot_input(X), self.epsilon)

    def score(self, X, y, sample_weight=None):
        """Negative relative residual ``-||p(X) - y|| / ||y||`` (complex-safe)."""
        y = as_vector(y, "y")
        r = self.predict(X) - y
        return -float(np.linalg.norm(r) / max(np.linalg.norm(y), 1e-300))


class ToeplitzSolver(BaseEstimator):
    """Superfast solver for a fixed Toeplitz matrix.

    ``fit(first_col, first_row=None)`` stores the matrix (symmetric when the
    row is omitted); ``predict(B)`` solves ``T X = B`` and ``transform(X)``
    returns ``T X``.

    Parameters
    ----------
    epsilon : float
    refine : int
        Refinement steps against the exact FFT product.
    """

    def __init__(self, epsilon=1e-8, refine=2):
        self.epsilon = epsilon
        self.refine = refine

    def fit(self, X, y=None):
        col = as_vector(np.ravel(X), "first_col")
        row = col.copy() if y is None else as_vector(y, "first_row")
        if row.shape != col.shape:
            raise DimensionError("first_col and first_row lengths differ")
        check_epsilon(self.epsilon)
        self.first_col_, self.first_row_ = col, row
        self.n_ = col.shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "first_col_")
        U2, flat = _columns(X, self.n_, "X")
        return _per_column(lambda b: toeplitz_solve(self.first_col_, self.first_row_, b,
                                                    self.epsilon, refine=self.refine), U2, flat)

    def transform(self, X):
        check_is_fitted(self, "first_col_")
        U2, flat = _columns(X, self.n_, "X")
        return _per_column(lambda u: toeplitz_matvec(self.first_col_, self.first_row_, u), U2, flat)


__all__ = ["CauchyCompressor", "ToeplitzSolver", "VandermondeEvaluator"]

"""DFT, f-circulant and Toeplitz kernels, plus dense reference constructions.

Conventions: ``omega_n = exp(2*pi*i/n)`` and ``Omega = (omega_n**(i*j))``.
With numpy's sign convention this gives ``Omega @ v == n * ifft(v)`` and
``inv(Omega) @ v == fft(v) / n``.  ``numpy.fft`` (pocketfft) handles every
length in O(n log n), falling back to Bluestein for awkward prime factors.
"""

from functools import lru_cache
import warnings

import numpy as np
import scipy.linalg as sla

from ._validation import as_matrix, as_scalar, as_vector, check_same_length
from .exceptions import DimensionError, InconsistentInputError, SingularMatrixError


@lru_cache(maxsize=64)
def _unity_powers(n):
    w = np.exp(2j * np.pi * np.arange(n) / n)
    w.setflags(write=False)
    return w


def root_of_unity(n):
    """Primitive ``n``-th root of unity ``exp(2*pi*i/n)``."""
    if n < 1:
        raise DimensionError("n must be positive")
    return complex(_unity_powers(n)[1 % n])


def unity_powers(n):
    """Read-only array ``(omega_n**j)`` for ``j = 0..n-1``."""
    if n < 1:
        raise DimensionError("n must be positive")
    return _unity_powers(n)


def dft(v):
    """Return ``Omega @ v``.

    Examples
    --------
    >>> dft([0, 1, 0, 0]).round(12) + 0  # + 0 clears signed zeros
    array([ 1.+0.j,  0.+1.j, -1.+0.j,  0.-1.j])
    """
    v = as_vector(v)
    return np.fft.ifft(v, axis=0) * v.shape[0]


def idft(v):
    """Return ``inv(Omega) @ v = Omega^H v / n``."""
    v = as_vector(v)
    return np.fft.fft(v, axis=0) / v.shape[0]


def _dft_cols(X):
    return np.fft.ifft(X, axis=0) * X.shape[0]


def _idft_cols(X):
    return np.fft.fft(X, axis=0) / X.shape[0]


def f_circulant_matvec(f, v, u):
    """Return ``Z_{f**n}(v) @ u`` through the diagonalization by ``V_f``.

    ``V_f = Omega diag(f**j)`` diagonalizes every ``f**n``-circulant, so the
    product costs three FFTs.

    Parameters
    ----------
    f : complex
        Nonzero scalar; the circulant parameter is ``f**n``.
    v : array_like
        First column of the f-circulant.
    u : array_like
        Vector (or ``(n, k)`` block of vectors) to multiply.
    """
    f = as_scalar(f, "f", nonzero=True)
    v = as_vector(v, "v")
    u = np.asarray(u, dtype=np.complex128)
    n = v.shape[0]
    if u.shape[0] != n:
        raise DimensionError(f"u has length {u.shape[0]}, expected {n}")
    scale = f ** np.arange(n)
    eig = np.fft.ifft(scale * v) * n
    if u.ndim == 2:
        y = _dft_cols(scale[:, None] * u) * eig[:, None]
        return _idft_cols(y) / scale[:, None]
    y = np.fft.ifft(scale * u) * n * eig
    return np.fft.fft(y) / n / scale


def circulant_matvec(e, v, u):
    """Return ``Z_e(v) @ u`` for any scalar ``e`` (``e = 0`` gives lower Toeplitz)."""
    e = as_scalar(e, "e")
    v = as_vector(v, "v")
    n = v.shape[0]
    if e == 0:
        row = np.zeros(n, dtype=np.complex128)
        row[0] = v[0]
        return toeplitz_matvec(v, row, u)
    return f_circulant_matvec(e ** (1.0 / n), v, u)


def toeplitz_matvec(first_col, first_row, u):
    """Return ``T @ u`` for the Toeplitz matrix with the given first column and row.

    Uses the ``(2n-1)``-point circulant embedding; ``u`` may be a vector or
    an ``(n, k)`` block.
    """
    c = as_vector(first_col, "first_col")
    r = as_vector(first_row, "first_row")
    if c[0] != r[0]:
        raise InconsistentInputError("first_col[0] and first_row[0] differ")
    u = np.asarray(u, dtype=np.complex128)
    m, n = c.shape[0], r.shape[0]
    if u.shape[0] != n:
        raise DimensionError(f"u has length {u.shape[0]}, expected {n}")
    size = m + n - 1
    nfft = 1 << (size - 1).bit_length()
    emb = np.zeros(nfft, dtype=np.complex128)
    emb[:m] = c
    emb[nfft - n + 1:] = r[:0:-1]
    spec = np.fft.fft(emb)
    if u.ndim == 2:
        prod = np.fft.ifft(spec[:, None] * np.fft.fft(u, nfft, axis=0), axis=0)
    else:
        prod = np.fft.ifft(spec * np.fft.fft(u, nfft))
    return prod[:m]


def dense_matvec(M, u):
    """Plain ``M @ u`` with shape checks; the O(mn) oracle."""
    M = as_matrix(M)
    u = as_vector(u, "u", allow_empty=True)
    if M.shape[1] != u.shape[0]:
        raise DimensionError(f"M has {M.shape[1]} columns but u has length {u.shape[0]}")
    return M @ u


def dense_solve(M, b, return_condition=False):
    """Solve ``M x = b`` by partial-pivot LU.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below ``n * eps * max|U|`` or the reciprocal
        condition estimate underflows working precision.
    """
    M = as_matrix(M, square=True)
    b = np.asarray(b, dtype=np.complex128)
    n = M.shape[0]
    if b.shape[0] != n:
        raise DimensionError(f"b has length {b.shape[0]}, expected {n}")
    with warnings.catch_warnings():
        # zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    diag = np.abs(np.diag(lu))
    scale = np.max(np.abs(lu)) if lu.size else 0.0
    if scale == 0 or diag.min() <= n * np.finfo(float).eps * scale:
        raise SingularMatrixError("matrix is numerically singular (tiny pivot)")
    anorm = np.linalg.norm(M, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if rcond < np.finfo(float).eps:
        raise SingularMatrixError(f"matrix is numerically singular (rcond={rcond:.2e})")
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    if return_condition:
        return x, 1.0 / rcond
    return x


# dense reference constructions (test oracles)

def naive_dft(v):
    """O(n^2) summation of ``Omega @ v``."""
    v = as_vector(v)
    n = v.shape[0]
    idx = np.arange(n)
    return np.exp(2j * np.pi * np.outer(idx, idx) / n) @ v


def reversal(n):
    """The reflection matrix ``J`` with ones on the antidiagonal."""
    return np.eye(n, dtype=np.complex128)[::-1]


def shift_matrix(e, n):
    """Dense unit e-circulant ``Z_e`` (down-shift with ``e`` in the corner)."""
    Z = np.eye(n, k=-1, dtype=np.complex128)
    if n:
        Z[0, n - 1] += e
    return Z


def dense_f_circulant(e, v):
    """Dense ``Z_e(v) = sum_i v_i Z_e**i``."""
    v = as_vector(v)
    n = v.shape[0]
    i, j = np.indices((n, n))
    M = v[(i - j) % n].copy()
    M[i < j] *= e
    return M


def dense_toeplitz(first_col, first_row):
    c = as_vector(first_col)
    r = as_vector(first_row)
    return sla.toeplitz(c, r).astype(np.complex128)


def dense_vandermonde(s, ncols=None):
    """``V_s = (s_i**j)`` with ``ncols`` columns (default ``len(s)``)."""
    s = as_vector(s)
    m = s.shape[0] if ncols is None else ncols
    return np.vander(s, m, increasing=True)


def dense_cauchy(s, t):
    """``C_{s,t} = (1 / (s_i - t_j))``."""
    s = as_vector(s)
    t = as_vector(t)
    return 1.0 / (s[:, None] - t[None, :])

"""Vandermonde products and solves through CV matrices.

With ``t_j = f omega_n**j`` and ``|f| = 1``, Lagrange interpolation at the
grid gives

    ``V_s = diag((s_i**n - f**n) / n) C_{s,t} diag(t_j / f**n) V_t``

and ``V_t = Omega diag(f**j)`` is applied by FFT.  The CV matrix is built
at ``epsilon (s_+ + 1) / (s_+**n + 1)`` so products are accurate to
``n (s_+ + 1) epsilon ||u||_inf``.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from .._validation import as_vector, check_epsilon
from ..core import dft, idft, unity_powers
from ..exceptions import DimensionError, InvalidToleranceError, MagnitudeOverflowError
from ..knots import KnotSet, as_knots
from .cauchy import cached_cv_hss
from ..hss import hss_solve

LOG_OVERFLOW = 300.0


def _powers(s):
    n = len(s)
    smax = s.max_magnitude
    if smax > 1 and n * math.log10(smax) > LOG_OVERFLOW:
        raise MagnitudeOverflowError(f"s_+**n overflows (s_+ = {smax:.4g}, n = {n}); "
                                     "rescale the knots toward the unit circle")
    return s.power()


def choose_rotation(s):
    """Unit ``f`` maximizing ``min_i |s_i**n - f**n|`` over ``4n`` equispaced ``f**n``.

    Returns ``(f, gap)`` where ``gap`` is the attained minimum.
    """
    s = as_knots(s)
    n = len(s)
    pw = _powers(s)
    cand = np.exp(2j * np.pi * (np.arange(4 * n) + 0.5) / (4 * n))
    tree = cKDTree(np.column_stack([pw.real, pw.imag]))
    d, _ = tree.query(np.column_stack([cand.real, cand.imag]))
    k = int(np.argmax(d))
    return complex(np.exp(1j * np.angle(cand[k]) / n)), float(d[k])


class _Plan:
    __slots__ = ("n", "f", "fn", "left", "fj", "tw", "H", "eps")

    def __init__(self, s, epsilon):
        n = len(s)
        self.n = n
        pw = _powers(s)
        self.f, _ = choose_rotation(s)
        self.fn = self.f ** n
        self.left = (pw - self.fn) / n
        self.fj = self.f ** np.arange(n)
        # t_j / f**n = omega**j f**(1 - n)
        self.tw = unity_powers(n) * self.f ** (1 - n)
        smax = s.max_magnitude
        self.eps = epsilon * (smax + 1) / (smax ** n + 1)
        self.H = cached_cv_hss(s, self.f, self.eps)


def _plan(s, epsilon):
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    return _Plan(s, eps)


def _check(s, u, name):
    u = as_vector(u, name)
    if u.shape[0] != len(s):
        raise DimensionError(f"{name} has length {u.shape[0]}, expected {len(s)}")
    return u


def vandermonde_matvec(s, u, epsilon):
    """``V_s u`` (values of the polynomial with coefficients ``u`` at ``s``).

    Examples
    --------
    >>> s = np.exp(2j * np.pi * np.arange(4) / 4)
    >>> bool(np.allclose(vandermonde_matvec(s, [1, 2, 3, 4], 1e-10), dft([1, 2, 3, 4])))
    True
    """
    s = as_knots(s)
    u = _check(s, u, "u")
    if s.is_grid:
        return dft(s.grid_scale ** np.arange(len(s)) * u)
    P = _plan(s, epsilon)
    w = P.tw * dft(P.fj * u)
    return P.left * P.H.matvec(w)


def vandermonde_transposed_matvec(s, u, epsilon):
    """``V_s^T u`` (power sums ``sum_i s_i**k u_i``)."""
    s = as_knots(s)
    u = _check(s, u, "u")
    if s.is_grid:
        return s.grid_scale ** np.arange(len(s)) * dft(u)
    P = _plan(s, epsilon)
    w = P.tw * P.H.rmatvec(P.left * u)
    # V_t^T = diag(f**j) Omega
    return P.fj * dft(w)


def vandermonde_solve(s, b, epsilon):
    """Coefficients ``x`` with ``V_s x = b``; fails closed when ill conditioned."""
    s = as_knots(s)
    b = _check(s, b, "b")
    if s.is_grid:
        return idft(b) / s.grid_scale ** np.arange(len(s))
    P = _plan(s, epsilon)
    y = hss_solve(P.H, b / P.left)
    # V_t^{-1} = diag(f**-j) Omega^{-1}
    return idft(y / P.tw) / P.fj


def vandermonde_transposed_solve(s, b, epsilon):
    """``x`` with ``V_s^T x = b``."""
    s = as_knots(s)
    b = _check(s, b, "b")
    if s.is_grid:
        return idft(b / s.grid_scale ** np.arange(len(s)))
    P = _plan(s, epsilon)
    w = idft(b / P.fj) / P.tw
    return hss_solve(P.H, w, transpose=True) / P.left

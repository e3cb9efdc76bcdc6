"""Polynomial evaluation at many points and interpolation."""

from dataclasses import dataclass

import numpy as np

from .._validation import as_vector
from ..exceptions import DimensionError
from ..knots import as_knots
from .vandermonde import vandermonde_matvec, vandermonde_solve


@dataclass(frozen=True, eq=False)
class Polynomial:
    """``p(x) = sum_i coef[i] x**i`` (ascending coefficients).

    ``formal=True`` marks a declared degree whose leading coefficient may be
    zero (as produced by interpolation).
    """

    coef: np.ndarray
    formal: bool = False

    def __post_init__(self):
        c = as_vector(self.coef, "coef")
        c.setflags(write=False)
        object.__setattr__(self, "coef", c)

    @property
    def degree(self):
        if self.formal:
            return self.coef.size - 1
        nz = np.flatnonzero(self.coef)
        return int(nz[-1]) if nz.size else 0

    def __call__(self, x):
        """Horner evaluation (exact reference)."""
        x = np.asarray(x, dtype=np.complex128)
        y = np.zeros_like(x)
        for c in self.coef[::-1]:
            y = y * x + c
        return y

    def __len__(self):
        return self.coef.size

    def __repr__(self):
        return f"Polynomial(degree={self.degree}, coef={np.array2string(self.coef, threshold=6)})"


def poly_multipoint_eval(p, s, epsilon):
    """Values ``p(s_i)`` through fast Vandermonde products.

    Coefficient vectors longer than ``len(s)`` are split into blocks of
    ``len(s)``; shorter ones are zero-padded.

    Examples
    --------
    >>> (poly_multipoint_eval(Polynomial([-1, 0, 1]), [0, 1, 2], 1e-8).real.round(12) + 0).tolist()
    [-1.0, 0.0, 3.0]
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    s = as_knots(s)
    m = len(s)
    c = p.coef
    nblk = -(-c.size // m)
    c = np.concatenate([c, np.zeros(nblk * m - c.size, dtype=np.complex128)])
    out = np.zeros(m, dtype=np.complex128)
    sm = s.power(m) if nblk > 1 else None
    for b in range(nblk - 1, -1, -1):
        out = out * sm if b < nblk - 1 else out
        out = out + vandermonde_matvec(s, c[b * m:(b + 1) * m], epsilon)
    return out


def poly_interpolate(s, v, epsilon):
    """The polynomial of degree ``< len(s)`` with ``p(s_i) = v_i``.

    Examples
    --------
    >>> (poly_interpolate([0, 1, 2], [-1, 0, 3], 1e-8).coef.real.round(10) + 0).tolist()
    [-1.0, 0.0, 1.0]
    """
    s = as_knots(s)
    v = as_vector(v, "v")
    if v.shape[0] != len(s):
        raise DimensionError(f"v has length {v.shape[0]}, expected {len(s)}")
    if len(s) == 1:
        return Polynomial(v.copy(), formal=True)
    return Polynomial(vandermonde_solve(s, v, epsilon), formal=True)

"""Seeded fixture recipes shared by the command line and the test suite.

All recipes draw from ``numpy.random.default_rng(seed)`` (PCG64), so a seed
fixes the fixture on every platform numpy supports.

Knot recipes for ``n`` knots:

``circle``
    ``r_j exp(2 pi i (j + 1/2 + a_j) / n)`` with ``a_j ~ U(-1/4, 1/4)`` and
    ``r_j = 1 + b_j / n``, ``b_j ~ U(-1/2, 1/2)``: one knot per gap of the
    ``n``-th roots of unity, close enough to the circle for ``C_{s, omega}``
    to stay well conditioned.
``annulus``
    ``r exp(i phi)``, ``r ~ U(1/2, 3/2)``, ``phi ~ U(0, 2 pi)``.
``clustered``
    ``0.3 sqrt(r) exp(i phi)``, uniform in the disc of radius 0.3
    (exponentially ill conditioned against the unit circle).
``perturbed``
    ``exp(2 pi i (j + a_j) / n)`` with ``a_j ~ U(-0.3, 0.3)``: perturbed
    roots of unity, well suited to Vandermonde solves.
"""

import numpy as np

from .exceptions import InputError

KNOT_RECIPES = ("circle", "annulus", "clustered", "perturbed")


def sample_knots(kind, n, rng):
    """Draw ``n`` knots by the named recipe (see the module docstring)."""
    rng = np.random.default_rng(rng)
    j = np.arange(n)
    if kind == "circle":
        ang = 2 * np.pi * (j + 0.5 + rng.uniform(-0.25, 0.25, n)) / n
        return (1 + rng.uniform(-0.5, 0.5, n) / n) * np.exp(1j * ang)
    if kind == "annulus":
        return rng.uniform(0.5, 1.5, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    if kind == "clustered":
        return 0.3 * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    if kind == "perturbed":
        return np.exp(2j * np.pi * (j + rng.uniform(-0.3, 0.3, n)) / n)
    raise InputError(f"unknown knot recipe {kind!r}; expected one of {', '.join(KNOT_RECIPES)}")


def sample_vector(n, rng):
    """Complex vector with standard normal real and imaginary parts."""
    rng = np.random.default_rng(rng)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def dominant_toeplitz(n, rng, symmetric=True):
    """First column and row of a diagonally dominant Toeplitz matrix.

    Off-diagonal entries are ``N(0, 1) / n`` so every row sum of
    off-diagonal magnitudes stays well below the diagonal ``2``.
    """
    rng = np.random.default_rng(rng)
    col = rng.standard_normal(n) / n + 0j
    row = col.copy() if symmetric else rng.standard_normal(n) / n + 0j
    col[0] = row[0] = 2.0
    return col, row


def singular_toeplitz(n, rng):
    """A rank-one Toeplitz matrix ``c * ones`` with random ``c``."""
    rng = np.random.default_rng(rng)
    c = complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1))
    v = np.full(n, c)
    return v, v.copy()


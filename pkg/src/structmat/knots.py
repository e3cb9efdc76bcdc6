"""Knot sets: ordered distinct complex nodes with cached polar data."""

import warnings

import numpy as np
from scipy.spatial import cKDTree

from ._validation import as_scalar, as_vector
from .core import unity_powers
from .exceptions import InconsistentInputError, KnotCollisionError

NEAR_TOL = 1e-14


class NearCoincidenceWarning(RuntimeWarning):
    """Two knots are distinct but closer than ``1e-14`` relative to scale."""


def _close_pairs(a, b, tol):
    tree = cKDTree(np.column_stack([b.real, b.imag]))
    hits = tree.query_ball_point(np.column_stack([a.real, a.imag]), r=tol)
    return [(i, j) for i, js in enumerate(hits) for j in js]


class KnotSet:
    """Immutable vector of pairwise distinct complex knots.

    Parameters
    ----------
    knots : array_like
        Complex scalars; exact duplicates are rejected.
    grid_scale : complex, optional
        Set when the knots are exactly ``grid_scale * omega_n**j``; fast
        paths (FFT inversion of ``V_t``, CV matrices) key off this.

    Attributes
    ----------
    values : ndarray
        Read-only complex128 knots.
    angles : ndarray
        Polar angles in ``[0, 2*pi)``.
    magnitudes : ndarray
        ``|s_i|``.
    """

    __slots__ = ("values", "grid_scale", "_angles", "_mags", "_near", "_key")

    def __init__(self, knots, grid_scale=None):
        vals = np.array(as_vector(knots, "knots"), dtype=np.complex128)
        if np.unique(vals).size != vals.size:
            raise KnotCollisionError("knot set has repeated entries")
        vals.setflags(write=False)
        self.values = vals
        self.grid_scale = None if grid_scale is None else complex(grid_scale)
        self._angles = None
        self._mags = None
        self._near = None
        self._key = None
        if self.near_coincident:
            warnings.warn("knots nearly coincide; expect ill conditioning",
                          NearCoincidenceWarning, stacklevel=2)

    @classmethod
    def grid(cls, f, n):
        """Knots ``f * omega_n**j``, ``j = 0..n-1``."""
        f = as_scalar(f, "f", nonzero=True)
        vals = f * unity_powers(n)
        return cls(vals, grid_scale=f)

    @classmethod
    def coerce(cls, knots):
        return knots if isinstance(knots, cls) else cls(knots)

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        tag = f", grid_scale={self.grid_scale}" if self.is_grid else ""
        return f"KnotSet(n={len(self)}{tag})"

    @property
    def is_grid(self):
        return self.grid_scale is not None

    @property
    def angles(self):
        if self._angles is None:
            a = np.mod(np.angle(self.values), 2 * np.pi)
            a.setflags(write=False)
            self._angles = a
        return self._angles

    @property
    def magnitudes(self):
        if self._mags is None:
            m = np.abs(self.values)
            m.setflags(write=False)
            self._mags = m
        return self._mags

    @property
    def max_magnitude(self):
        """``s_+ = max |s_i|``."""
        return float(self.magnitudes.max())

    @property
    def scale(self):
        return max(self.max_magnitude, 1.0)

    @property
    def near_coincident(self):
        if self._near is None:
            tol = NEAR_TOL * self.scale
            pairs = _close_pairs(self.values, self.values, tol) if len(self) > 1 else []
            self._near = any(i != j for i, j in pairs)
        return self._near

    @property
    def key(self):
        """Hashable identity used by solver caches."""
        if self._key is None:
            self._key = self.values.tobytes()
        return self._key

    def power(self, k=None):
        """``s_i**k`` (default ``k = n``); exact for grid knots."""
        k = len(self) if k is None else k
        if self.is_grid and k % len(self) == 0:
            return np.full(len(self), self.grid_scale ** k, dtype=np.complex128)
        return self.values ** k

    def take(self, idx):
        """Sub-knot set (grid tag is dropped)."""
        return KnotSet(self.values[np.asarray(idx)])

    def permuted(self, perm):
        return KnotSet(self.values[np.asarray(perm)])

    def check_disjoint(self, other, what="s and t"):
        """Raise on exact collisions with ``other``; warn on near ones."""
        other = KnotSet.coerce(other)
        common = np.intersect1d(self.values, other.values)
        if common.size:
            raise KnotCollisionError(f"{what} share {common.size} knot(s), e.g. {common[0]}")
        tol = NEAR_TOL * max(self.scale, other.scale)
        if _close_pairs(self.values, other.values, tol):
            warnings.warn(f"{what} nearly coincide; expect ill conditioning",
                          NearCoincidenceWarning, stacklevel=2)
        return other


def as_knots(knots, name="knots"):
    if isinstance(knots, KnotSet):
        return knots
    try:
        return KnotSet(knots)
    except KnotCollisionError:
        raise
    except Exception as exc:
        raise InconsistentInputError(f"{name}: {exc}") from exc

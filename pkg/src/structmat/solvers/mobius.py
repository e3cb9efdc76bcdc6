"""Changes of variable that move Cauchy knots onto the real line.

For knots on a line ``c + a R`` (``|a| = 1``) the affine map
``s' = (s - c) / a`` gives ``C_{s,t} = C_{s',t'} / a``.  For knots on the
unit circle the map ``s' = i (s + a) / (s - a)`` with ``|a| = 1`` gives

    ``C_{s,t} = diag(-2 i a / (s_i - a)) C_{s',t'} diag(1 / (t_j - a))``

since ``s' - t' = 2 i a (t - s) / ((s - a)(t - a))``.
"""

from dataclasses import dataclass

import numpy as np

from .._validation import as_scalar
from ..exceptions import DegenerateCenterError, OffCurveKnotError
from ..knots import KnotSet, as_knots

CURVE_TOL = 1e-10


@dataclass(frozen=True)
class MobiusImage:
    """Real images of circle knots with the diagonal factors for each role.

    Attributes
    ----------
    knots : KnotSet
        Real parts of the mapped knots.
    a : complex
        Pole of the map (on the unit circle).
    row_factor : ndarray
        ``-2 i a / (s_i - a)``: multiply rows when the knots are row knots.
    col_factor : ndarray
        ``1 / (s_i - a)``: multiply columns when they are column knots.
    max_imag : float
        Largest imaginary part discarded by the projection to the real line.
    """

    knots: KnotSet
    a: complex
    row_factor: np.ndarray
    col_factor: np.ndarray
    max_imag: float


def mobius_line_to_real(knots, line):
    """Map knots on the line ``c + a R`` to real knots.

    Returns
    -------
    real : KnotSet
        ``(s - c) / a`` (real parts).
    a : complex
        ``C_{s,t} = C_{s',t'} / a``.

    Examples
    --------
    >>> r, a = mobius_line_to_real([2j], (0, 1j))
    >>> r.values.real.tolist(), a
    ([2.0], 1j)
    """
    s = as_knots(knots)
    c, a = line
    c = as_scalar(c, "c")
    a = as_scalar(a, "a", nonzero=True)
    a = a / abs(a)
    img = (s.values - c) / a
    scale = max(1.0, float(np.abs(img).max()))
    if np.abs(img.imag).max() > CURVE_TOL * scale:
        raise OffCurveKnotError("knots are not on the stated line")
    return KnotSet(img.real.astype(np.complex128)), a


def _pole_on_arc(avoid, lo, hi, samples=256):
    """Point of the arc ``[lo, hi]`` (angles) farthest from ``avoid``."""
    ang = np.linspace(lo, hi, samples + 2)[1:-1]
    cand = np.exp(1j * ang)
    if avoid.size == 0:
        return complex(cand[samples // 2])
    d = np.abs(cand[:, None] - avoid[None, :]).min(axis=1)
    return complex(cand[int(np.argmax(d))])


def choose_pole(knots, lo=0.0, hi=2 * np.pi):
    """Pole on the unit circle at the largest distance from ``knots``."""
    return _pole_on_arc(np.asarray(knots, dtype=np.complex128), lo, hi)


def mobius_circle_to_real(knots, a=None):
    """Map unit-circle knots to the real line through ``s' = i (s + a) / (s - a)``.

    Parameters
    ----------
    knots : KnotSet or array_like
        Knots with ``|s| = 1`` to within ``1e-10``.
    a : complex, optional
        Pole on the unit circle; chosen farthest from the knots if omitted.

    Examples
    --------
    >>> img = mobius_circle_to_real([1j, -1, -1j], a=1)
    >>> (np.round(img.knots.values.real, 12) + 0).tolist()
    [1.0, 0.0, -1.0]
    """
    s = as_knots(knots)
    v = s.values
    if np.abs(np.abs(v) - 1).max() > CURVE_TOL:
        raise OffCurveKnotError("knots are not on the unit circle")
    a = choose_pole(v) if a is None else as_scalar(a, "a", nonzero=True)
    if abs(abs(a) - 1) > CURVE_TOL:
        raise OffCurveKnotError("the pole must lie on the unit circle")
    d = v - a
    if np.any(d == 0):
        raise DegenerateCenterError("a knot coincides with the pole")
    img = 1j * (v + a) / d
    scale = np.maximum(1.0, np.abs(img))
    max_imag = float(np.abs(img.imag).max())
    if np.any(np.abs(img.imag) > CURVE_TOL * scale):
        raise OffCurveKnotError("mapped knots are not real; knots are off the circle")
    return MobiusImage(KnotSet(img.real.astype(np.complex128)), a, -2j * a / d, 1.0 / d, max_imag)


@dataclass(frozen=True)
class Curve:
    kind: str
    center: complex
    param: complex

    def __repr__(self):
        return f"Curve({self.kind}, center={self.center:.6g}, param={self.param:.6g})"


def detect_curve(knots, tol=CURVE_TOL):
    """Return the line or circle through all ``knots``, or ``None``.

    Lines are ``Curve("line", c, a)`` (points ``c + a x``, ``|a| = 1``);
    circles are ``Curve("circle", center, radius)``.  The fit residual must
    be at most ``tol`` relative to the knot scale.
    """
    z = np.asarray(knots, dtype=np.complex128).ravel()
    scale = max(1.0, float(np.abs(z).max()))
    if z.size == 1:
        return Curve("line", complex(z[0]), 1.0 + 0j)
    c = z.mean()
    w = z - c
    X = np.column_stack([w.real, w.imag])
    _, sv, Vt = np.linalg.svd(X, full_matrices=False)
    a = complex(Vt[0, 0], Vt[0, 1])
    resid = np.abs((w / a).imag)
    if resid.max() <= tol * scale:
        return Curve("line", complex(c), a)
    if z.size < 3:
        return None
    # algebraic circle fit x^2 + y^2 + D x + E y + F = 0
    A = np.column_stack([z.real, z.imag, np.ones(z.size)])
    rhs = -(z.real ** 2 + z.imag ** 2)
    (D, E, Fc), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    center = complex(-D / 2, -E / 2)
    r2 = abs(center) ** 2 - Fc
    if r2 <= 0:
        return None
    r = float(np.sqrt(r2))
    if np.abs(np.abs(z - center) - r).max() <= tol * max(scale, r):
        return Curve("circle", center, r)
    return None


def arc_index(knots, arcs=3):
    """Index of the semi-open arc ``[2 pi h/arcs, 2 pi (h+1)/arcs)`` holding each knot."""
    ang = np.mod(np.angle(np.asarray(knots, dtype=np.complex128)), 2 * np.pi)
    return np.minimum((ang * arcs / (2 * np.pi)).astype(np.int64), arcs - 1)


def pole_arc(p, q):
    """Arc holding the pole for the block between arcs ``p`` and ``q``.

    It is the arc not in ``{p, q}``; for ``p == q`` the next arc is used.
    """
    if p == q:
        return (p + 1) % 3
    return 3 - p - q

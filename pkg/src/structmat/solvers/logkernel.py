"""Products ``prod_j (s_i - t_j)`` through a summed logarithmic kernel.

``sum_j ln(s_i - t_j)`` is accumulated with a tree code: a cluster of roots
with center ``c`` and radius ``r`` seen from a target at ratio
``theta = r / |s - c| <= 1/2`` contributes

    ``n_c ln(s - c) - sum_{h >= 1} m_h / (h (s - c)**h)``,
    ``m_h = sum_j (t_j - c)**h``,

and nearer clusters are split or summed directly.  Each logarithm uses the
principal branch; the final exponential removes any ``2 pi i`` ambiguity.
"""

import math

import numpy as np

from .._validation import check_epsilon
from ..core import idft, unity_powers
from ..exceptions import InvalidToleranceError, KnotCollisionError
from ..knots import as_knots

LEAF = 32
THETA = 0.5

# branch of the logarithm; tests swap this to inject 2 pi i shifts
_log = np.log


class _Cluster:
    __slots__ = ("idx", "center", "radius", "moments", "children")


def _build(t, idx, order):
    node = _Cluster()
    pts = t[idx]
    lo = np.array([pts.real.min(), pts.imag.min()])
    hi = np.array([pts.real.max(), pts.imag.max()])
    node.center = complex((lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2)
    node.radius = float(np.abs(pts - node.center).max())
    node.idx = idx
    w = pts - node.center
    node.moments = np.array([np.sum(w ** h) for h in range(1, order + 1)])
    node.children = ()
    if idx.size > LEAF and node.radius > 0:
        axis = 0 if hi[0] - lo[0] >= hi[1] - lo[1] else 1
        key = pts.real if axis == 0 else pts.imag
        mid = (lo[axis] + hi[axis]) / 2
        left = key <= mid
        if left.any() and (~left).any():
            node.children = (_build(t, idx[left], order), _build(t, idx[~left], order))
    return node


def _accumulate(node, t, s, tidx, out, order):
    ds = s[tidx] - node.center
    far = np.abs(ds) * THETA >= node.radius
    if node.radius == 0:
        far = np.abs(ds) > 0
    fi = tidx[far]
    if fi.size:
        d = ds[far]
        acc = node.idx.size * _log(d)
        inv = 1.0 / d
        p = np.ones_like(d)
        for h in range(1, order + 1):
            p = p * inv
            acc = acc - node.moments[h - 1] * p / h
        out[fi] += acc
    near = tidx[~far]
    if near.size == 0:
        return
    if node.children:
        for ch in node.children:
            _accumulate(ch, t, s, near, out, order)
        return
    diff = s[near][:, None] - t[node.idx][None, :]
    if np.any(diff == 0):
        raise KnotCollisionError("a target coincides with a root")
    out[near] += _log(diff).sum(axis=1)


def log_kernel_sum(roots, targets, epsilon):
    """``sum_j ln(s_i - t_j)`` up to multiples of ``2 pi i``."""
    t = as_knots(roots, "roots").values
    s = np.asarray(targets, dtype=np.complex128).ravel()
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    n = t.size
    # per-term tail theta**(K+1) / ((K+1)(1-theta)) summed over n roots stays below eps
    order = max(1, math.ceil(math.log(eps / (2 * n)) / math.log(THETA)))
    root = _build(t, np.arange(n), order)
    out = np.zeros(s.size, dtype=np.complex128)
    _accumulate(root, t, s, np.arange(s.size), out, order)
    return out


def log_kernel_eval_from_roots(roots, targets, epsilon, return_coefficients=False):
    """Values ``prod_j (s_i - t_j)`` from the summed log kernel.

    With ``return_coefficients`` the targets must be the ``N``-th roots of
    unity in natural order (``N >= n``); the IDFT of the values is returned
    as well: the coefficients of ``t(x)`` when ``N > n``, or of
    ``t(x) - x**n`` when ``N = n`` (where ``x**n`` aliases onto the constant).

    Examples
    --------
    >>> log_kernel_eval_from_roots([1, -1], [2], 1e-10).real.round(10).tolist()
    [3.0]
    """
    vals = np.exp(log_kernel_sum(roots, targets, epsilon))
    if not return_coefficients:
        return vals
    n = len(as_knots(roots, "roots"))
    N = vals.size
    s = np.asarray(targets, dtype=np.complex128).ravel()
    if N < n or np.abs(s - unity_powers(N)).max() > 1e-12:
        raise InvalidToleranceError("coefficients need the N-th roots of unity (N >= n) as targets")
    coef = idft(vals)
    if N == n:
        coef[0] -= 1.0
    return vals, coef

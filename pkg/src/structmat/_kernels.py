"""Compiled inner loops for the circle-grid Cauchy matvec.

The near field (each row sector against its extended diagonal) is summed
directly; far-field blocks are applied through per-sector series moments
``M[p, h] = sum_j ((t_j - c_p) / r_p)**h x_j`` evaluated at each row with
Horner's rule.  Nothing of size ``O(n rho)`` is stored, so the cost stays
compute-bound at every size.  :func:`cauchy_direct` is the plain O(mn)
summation used for exact products.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True, error_model="numpy")
def sector_moments(t, x, coff, centers, radii, order):
    k = centers.shape[0]
    M = np.zeros((k, order + 1), dtype=np.complex128)
    for p in range(k):
        c = centers[p]
        r = radii[p]
        for j in range(coff[p], coff[p + 1]):
            w = (t[j] - c) / r
            acc = x[j]
            for h in range(order + 1):
                M[p, h] += acc
                acc *= w
    return M


@njit(cache=True, fastmath=True, error_model="numpy")
def far_apply(s, sector, inter, centers, radii, M, order, y):
    m = s.shape[0]
    J = inter.shape[1]
    for i in range(m):
        q = sector[i]
        si = s[i]
        tot = 0j
        for a in range(J):
            p = inter[q, a]
            if p < 0:
                continue
            inv = 1.0 / (si - centers[p])
            z = radii[p] * inv
            acc = M[p, order]
            for h in range(order - 1, -1, -1):
                acc = acc * z + M[p, h]
            tot += acc * inv
        y[i] += tot


@njit(cache=True, fastmath=True, error_model="numpy")
def near_apply(s, sector, t, x, coff, y):
    m = s.shape[0]
    k = coff.shape[0] - 1
    n = t.shape[0]
    for i in range(m):
        q = sector[i]
        si = s[i]
        tot = 0j
        for d in (-1, 0, 1):
            p = (q + d) % k
            for j in range(coff[p], coff[p + 1]):
                tot += x[j] / (si - t[j])
        y[i] += tot


@njit(cache=True, error_model="numpy")
def cauchy_direct(s, t, x, y):
    """``y[i] += sum_j x[j] / (s[i] - t[j])`` by direct O(mn) summation."""
    for i in range(s.shape[0]):
        si = s[i]
        tot = 0j
        for j in range(t.shape[0]):
            tot += x[j] / (si - t[j])
        y[i] += tot

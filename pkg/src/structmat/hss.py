"""Low-rank compression of Cauchy matrices over separated knot sets.

The building block is the truncated geometric series
``1/(s - t) = sum_h (t - c)**h / (s - c)**(h + 1)``, valid when every
``|t - c| <= theta |s - c|`` with ``theta < 1``; its tail after ``k + 1``
terms is at most ``theta**k / ((1 - theta) delta)`` with
``delta = min |s - c|``.

:func:`build_cv_hss` partitions the unit circle into angular sectors,
keeps the extended diagonal (each sector and its two neighbours) dense and
compresses the remaining blocks level by level, coarse sectors first.
:func:`real_line_hss` does the same over a bisection tree of a real
interval.  Both produce an :class:`HssApprox`.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp

from ._validation import as_scalar, as_vector, check_epsilon
from .core import dense_cauchy, dense_solve
from .exceptions import (DegenerateCenterError, DimensionError, IllConditionedError,
                         SingularMatrixError,
                         InvalidToleranceError, KnotCollisionError, NotSeparatedError,
                         OffCurveKnotError, PartitionTooCoarseError)
from ._kernels import far_apply, near_apply, sector_moments
from .hodlr import HodlrMatrix
from .knots import KnotSet, as_knots

MAX_RANK = 128
MIN_SECTORS = 8
DEFAULT_LEAF = 64
COND_ITERS = 8


# separation and single blocks ---------------------------------------------

@dataclass(frozen=True)
class SeparationCertificate:
    """``theta = max|t - c| / min|s - c|`` and ``delta = min|s - c|``."""

    theta: float
    center: complex
    delta: float
    radius: float = 0.0

    @property
    def separated(self):
        return self.theta < 1


def _values(x):
    return x.values if isinstance(x, KnotSet) else as_vector(x)


def separation(s, t, c):
    """Exact separation certificate of ``t`` from ``s`` about ``c``.

    Examples
    --------
    >>> separation([2], [0.5], 0)
    SeparationCertificate(theta=0.25, center=0j, delta=2.0, radius=0.5)
    """
    s, t = _values(s), _values(t)
    c = complex(c)
    ds = np.abs(s - c)
    delta = float(ds.min())
    if delta == 0:
        raise DegenerateCenterError("a row knot coincides with the expansion center")
    radius = float(np.abs(t - c).max())
    return SeparationCertificate(radius / delta, c, delta, radius)


def taylor_bound(theta, delta, k):
    """``theta**k / ((1 - theta) delta)``; zero when ``theta == 0`` and ``k >= 1``."""
    if theta == 0:
        return 0.0 if k >= 1 else 1.0 / delta
    return theta ** k / ((1 - theta) * delta)


def taylor_order(theta, delta, epsilon):
    """Smallest ``k`` with ``taylor_bound(theta, delta, k) <= epsilon``."""
    if theta == 0:
        return 1
    k = math.ceil(math.log(epsilon * (1 - theta) * delta) / math.log(theta))
    k = max(k, 0)
    while k > 0 and taylor_bound(theta, delta, k - 1) <= epsilon:
        k -= 1
    while taylor_bound(theta, delta, k) > epsilon:
        k += 1
    return k


def rank_bound(theta, delta, epsilon):
    """Smallest ``rho >= 0`` with ``4 theta**rho / ((1 - theta) delta pi) <= epsilon``.

    Examples
    --------
    >>> rank_bound(1/3, 0.01, 1e-8)
    22
    """
    if not 0 < theta < 1 or delta <= 0 or epsilon <= 0:
        raise InvalidToleranceError("need 0 < theta < 1, delta > 0, epsilon > 0")
    f = lambda r: 4 * theta ** r / ((1 - theta) * delta * math.pi)
    rho = max(0, math.ceil(math.log(epsilon * (1 - theta) * delta * math.pi / 4) / math.log(theta)))
    while rho > 0 and f(rho - 1) <= epsilon:
        rho -= 1
    while f(rho) > epsilon:
        rho += 1
    return rho


@dataclass(eq=False)
class LowRankBlock:
    """One admissible block ``C[rows, cols] ~ F @ G.T``.

    ``error_bound`` bounds the entrywise error.  Blocks straight from
    :func:`taylor_low_rank` carry the pure series bound; blocks inside an
    :class:`HssApprox` are recompressed and carry series bound plus SVD
    truncation error.
    """

    F: np.ndarray
    G: np.ndarray
    cert: SeparationCertificate
    error_bound: float
    taylor_order: int
    row_knots: np.ndarray = None
    col_knots: np.ndarray = None
    taylor_bound: float = 0.0
    truncation_error: float = 0.0
    level: int = -1
    row_sector: int = -1
    col_sector: int = -1
    rows: tuple = (0, 0)
    cols: tuple = (0, 0)

    @property
    def rank(self):
        return self.F.shape[1]

    @property
    def shape(self):
        return self.F.shape[0], self.G.shape[0]

    def to_dense(self):
        return self.F @ self.G.T


def _series_factors(ds, dt, k, radius):
    h = np.arange(k + 1)
    F = (1.0 / ds)[:, None] * (radius / ds)[:, None] ** h
    G = (dt / radius)[:, None] ** h
    return F, G


def taylor_low_rank(s, t, c, k, scaled=False):
    """Truncated series factors ``F = (1/(s_i - c)**(h+1))``, ``G = ((t_j - c)**h)``, ``h = 0..k``.

    With ``scaled=True`` the columns are rebalanced by powers of
    ``max|t - c|`` (same product, better floating-point range).

    Raises
    ------
    NotSeparatedError
        If ``theta >= 1`` about ``c``.
    """
    s, t = _values(s), _values(t)
    cert = separation(s, t, c)
    if cert.theta >= 1:
        raise NotSeparatedError(f"theta = {cert.theta:.3g} >= 1 about center {c}")
    if k < 0:
        raise InvalidToleranceError("k must be nonnegative")
    radius = cert.radius if scaled and cert.radius > 0 else 1.0
    F, G = _series_factors(s - cert.center, t - cert.center, k, radius)
    bound = taylor_bound(cert.theta, cert.delta, k)
    return LowRankBlock(F, G, cert, bound, k, row_knots=s, col_knots=t, taylor_bound=bound)


def _compressed_block(ds, dt, epsilon, cert, max_rank=MAX_RANK):
    """Series factors at the order meeting ``epsilon/2``, SVD-truncated at ``epsilon/2``.

    The series target is tightened by ``sqrt(m p)`` so its spectral error
    stays below the truncation threshold; this keeps ranks monotone in
    ``epsilon``.  Returns ``None`` when the order would exceed ``max_rank``.
    """
    m, p = ds.shape[0], dt.shape[0]
    half = epsilon / 2
    target = half / (2 * math.sqrt(m * p))
    k = taylor_order(cert.theta, cert.delta, target)
    if k + 1 > max_rank:
        return None
    radius = cert.radius if cert.radius > 0 else 1.0
    F, G = _series_factors(ds, dt, k, radius)
    tb = taylor_bound(cert.theta, cert.delta, k)
    Qf, Rf = np.linalg.qr(F)
    Qg, Rg = np.linalg.qr(G)
    W, sv, Zh = np.linalg.svd(Rf @ Rg.T)
    r = int(np.sum(sv > half))
    trunc = float(sv[r]) if r < sv.size else 0.0
    U = (Qf @ W[:, :r]) * sv[:r]
    V = Qg @ Zh[:r].T
    return LowRankBlock(U, V, cert, tb + trunc, k, taylor_bound=tb, truncation_error=trunc)


# sector partition -----------------------------------------------------------

def sector_theta(k):
    """Worst-case separation ratio ``2 sin(pi/(2k)) / sin(3 pi/k)`` for midpoint centers."""
    return 2 * math.sin(math.pi / (2 * k)) / math.sin(3 * math.pi / k)


def _circ_dist(p, q, k):
    d = abs(p - q) % k
    return min(d, k - d)


@dataclass(frozen=True, eq=False)
class SectorPartition:
    """Assignment of row and column knots to ``k`` angular sectors ``[2 pi p/k, 2 pi (p+1)/k)``.

    Row knots are reordered by polar angle (``permutation[i]`` is the
    original index of sorted row ``i``); ``row_offsets[p]:row_offsets[p+1]``
    is sector ``p``'s row range, likewise for columns.
    """

    k: int
    permutation: np.ndarray
    row_sector: np.ndarray
    row_offsets: np.ndarray
    col_permutation: np.ndarray
    col_sector: np.ndarray
    col_offsets: np.ndarray
    centers: np.ndarray

    @property
    def h(self):
        return len(self.col_permutation) / self.k

    def rows(self, p):
        return slice(int(self.row_offsets[p]), int(self.row_offsets[p + 1]))

    def cols(self, p):
        return slice(int(self.col_offsets[p]), int(self.col_offsets[p + 1]))

    def adjacent(self, p, q):
        return _circ_dist(p, q, self.k) <= 1

    def extended_cols(self, q):
        """Column positions of sectors ``q-1, q, q+1`` (mod k), in sorted-column order."""
        secs = sorted({(q - 1) % self.k, q, (q + 1) % self.k})
        return np.concatenate([np.arange(self.col_offsets[p], self.col_offsets[p + 1]) for p in secs])

    @property
    def theta(self):
        return sector_theta(self.k)


def _sector_of_angles(angles, k):
    sec = np.floor(angles * (k / (2 * np.pi))).astype(np.int64)
    return np.clip(sec, 0, k - 1)


def sector_partition(s, t_grid, k, allow_coarse=False):
    """Partition row knots ``s`` and circle column knots into ``k`` sectors.

    Parameters
    ----------
    s : KnotSet or array_like
    t_grid : (e, n) tuple or KnotSet
        Either the grid ``e omega_n**j`` (angles measured after dividing by
        ``e``, so the grid sits at ``2 pi j / n``) or explicit circle knots.
    k : int
        Sector count; must be at least 8 unless ``allow_coarse``.
    """
    if k < MIN_SECTORS and not allow_coarse:
        raise PartitionTooCoarseError(f"k = {k} < {MIN_SECTORS}: the midpoint ratio "
                                      f"{sector_theta(k) if k > 3 else float('inf'):.3g} is too large")
    sv = _values(s)
    if isinstance(t_grid, tuple):
        e, n = t_grid
        e = as_scalar(e, "e", nonzero=True)
        ang = np.mod(np.angle(sv / e), 2 * np.pi)
        cperm = np.arange(n)
        csec = (np.arange(n) * k) // n
    else:
        tv = _values(t_grid)
        n = tv.shape[0]
        tang = np.mod(np.angle(tv), 2 * np.pi)
        cperm = np.argsort(tang, kind="stable")
        csec = _sector_of_angles(tang[cperm], k)
        ang = np.mod(np.angle(sv), 2 * np.pi)
    perm = np.argsort(ang, kind="stable")
    rsec = _sector_of_angles(ang[perm], k)
    roff = np.searchsorted(rsec, np.arange(k + 1), side="left")
    coff = np.searchsorted(csec, np.arange(k + 1), side="left")
    centers = np.exp(1j * np.pi * (2 * np.arange(k) + 1) / k)
    return SectorPartition(k, perm, rsec, roff, cperm, csec, coff, centers)


# the compressed matrix ------------------------------------------------------

@dataclass(eq=False)
class DenseBlock:
    rows: tuple
    cols: np.ndarray
    data: np.ndarray
    level: int = -1
    row_sector: int = -1
    reason: str = "diagonal"


@dataclass(eq=False)
class HssApprox:
    """Hierarchical approximation ``C ~ scale * P_r^T (D + U V^T) P_c``.

    Attributes
    ----------
    shape : tuple
    row_perm, col_perm : ndarray
        ``row_perm[i]`` is the original index of permuted row ``i``.
    scale : complex
        Global factor (``1/e`` for a grid ``e omega_n**j``).
    epsilon : float
        Entrywise tolerance met by every admissible block.
    blocks : list of LowRankBlock
        Admissible blocks in permuted coordinates.
    dense_blocks : list of DenseBlock
    entry : callable
        ``entry(i, j)`` gives exact entries for original index arrays.
    """

    shape: tuple
    row_perm: np.ndarray
    col_perm: np.ndarray
    scale: complex
    epsilon: float
    blocks: list
    dense_blocks: list
    entry: object = None
    kind: str = "cv"
    overflow: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    _ops: tuple = field(default=None, repr=False)
    _tops: tuple = field(default=None, repr=False)
    _hodlr: dict = field(default_factory=dict, repr=False)
    _cond: float = field(default=None, repr=False)

    @property
    def n(self):
        return self.shape[1]

    @property
    def rho(self):
        """Largest stored admissible rank."""
        return max((b.rank for b in self.blocks), default=0)

    @property
    def max_bound(self):
        return max((b.error_bound for b in self.blocks), default=0.0)

    @property
    def levels(self):
        out = {}
        for b in self.blocks:
            out.setdefault(b.level, []).append(b)
        return out

    @property
    def is_dense_only(self):
        return not self.blocks and len(self.dense_blocks) == 1 and self.meta.get("fallback", False)

    def _assemble(self):
        if self._ops is not None:
            return self._ops
        m, n = self.shape
        ri, ci, dv = [], [], []
        for db in self.dense_blocks:
            r0, r1 = db.rows
            rr = np.repeat(np.arange(r0, r1), len(db.cols))
            cc = np.tile(db.cols, r1 - r0)
            ri.append(rr)
            ci.append(cc)
            dv.append(db.data.ravel())
        cat = lambda xs, dt: np.concatenate(xs) if xs else np.zeros(0, dtype=dt)
        D = sp.csr_matrix((cat(dv, np.complex128), (cat(ri, np.int64), cat(ci, np.int64))), shape=(m, n))
        ur, uc, uv, vr, vc, vv = [], [], [], [], [], []
        off = 0
        for b in self.blocks:
            r0, r1 = b.rows
            c0, c1 = b.cols
            k = b.rank
            if k == 0:
                continue
            ur.append(np.repeat(np.arange(r0, r1), k))
            uc.append(np.tile(np.arange(off, off + k), r1 - r0))
            uv.append(b.F.ravel())
            vr.append(np.repeat(np.arange(off, off + k), c1 - c0))
            vc.append(np.tile(np.arange(c0, c1), k))
            vv.append(b.G.T.ravel())
            off += k
        U = sp.csr_matrix((cat(uv, np.complex128), (cat(ur, np.int64), cat(uc, np.int64))), shape=(m, off))
        Vt = sp.csr_matrix((cat(vv, np.complex128), (cat(vr, np.int64), cat(vc, np.int64))), shape=(off, n))
        self._ops = (D, U, Vt)
        return self._ops

    def _assemble_t(self):
        if self._tops is None:
            D, U, Vt = self._assemble()
            self._tops = (D.T.tocsr(), U.T.tocsr(), Vt.T.tocsr())
        return self._tops


    def matvec(self, u):
        """Approximate ``C @ u`` for a vector or ``(n, k)`` block."""
        u = np.asarray(u, dtype=np.complex128)
        if u.shape[0] != self.shape[1]:
            raise DimensionError(f"u has length {u.shape[0]}, expected {self.shape[1]}")
        up = u[self.col_perm]
        plan = self.meta.get("plan")
        if plan is not None and u.ndim == 1:
            yp = plan.apply(up)
        else:
            D, U, Vt = self._assemble()
            yp = D @ up + U @ (Vt @ up)
        y = np.empty((self.shape[0],) + u.shape[1:], dtype=np.complex128)
        y[self.row_perm] = yp
        return self.scale * y

    def rmatvec(self, u):
        """Approximate ``C^T @ u``."""
        u = np.asarray(u, dtype=np.complex128)
        if u.shape[0] != self.shape[0]:
            raise DimensionError(f"u has length {u.shape[0]}, expected {self.shape[0]}")
        Dt, Ut, V = self._assemble_t()
        up = u[self.row_perm]
        yp = Dt @ up + V @ (Ut @ up)
        y = np.empty((self.shape[1],) + u.shape[1:], dtype=np.complex128)
        y[self.col_perm] = yp
        return self.scale * y

    def to_dense(self):
        D, U, Vt = self._assemble()
        Mp = D.toarray() + (U @ Vt).toarray()
        M = np.empty(self.shape, dtype=np.complex128)
        M[np.ix_(self.row_perm, self.col_perm)] = Mp
        return self.scale * M

    def coverage(self):
        """Count of blocks covering each permuted entry (all ones for a valid tiling)."""
        cov = np.zeros(self.shape, dtype=np.int64)
        for db in self.dense_blocks:
            cov[db.rows[0]:db.rows[1], db.cols] += 1
        for b in self.blocks:
            cov[b.rows[0]:b.rows[1], b.cols[0]:b.cols[1]] += 1
        return cov

    def dump(self):
        """Lines ``level sector rows cols rank theta delta bound`` per admissible block."""
        lines = ["level sector rows cols rank theta delta bound"]
        for b in sorted(self.blocks, key=lambda b: (b.level, b.row_sector, b.col_sector)):
            lines.append(f"{b.level} {b.row_sector}:{b.col_sector} {b.shape[0]} {b.shape[1]} {b.rank} "
                         f"{b.cert.theta:.6g} {b.cert.delta:.6g} {b.error_bound:.3e}")
        return "\n".join(lines)

    def level_summary(self):
        """Per level: block count, max rank, max bound."""
        out = []
        for lev, bl in sorted(self.levels.items()):
            out.append({"level": lev, "blocks": len(bl), "max_rank": max(b.rank for b in bl),
                        "max_bound": max(b.error_bound for b in bl),
                        "max_theta": max(b.cert.theta for b in bl)})
        return out

    # solve support -----------------------------------------------------

    def hodlr(self, transpose=False):
        """Lazily built HODLR factorization over the permuted ordering."""
        if self.shape[0] != self.shape[1]:
            raise DimensionError("solve needs a square matrix")
        if self.entry is None:
            raise DimensionError("this approximation carries no entry function")
        if "plain" not in self._hodlr:
            rp, cp = self.row_perm, self.col_perm
            ent = lambda i, j: self.entry(rp[i], cp[j])
            n = self.shape[0]
            tol = min(max(self.epsilon, 1e-15), 1e-6)
            # auxiliary blocks only need to keep the epsilon-level data meaningful;
            # the global 1/(n epsilon) screen is applied separately
            self._hodlr["plain"] = HodlrMatrix(ent, n, tol, leaf_size=DEFAULT_LEAF,
                                               cond_limit=1.0 / self.epsilon)
        if transpose:
            if "t" not in self._hodlr:
                self._hodlr["t"] = self._hodlr["plain"].transpose()
            return self._hodlr["t"].factor()
        return self._hodlr["plain"].factor()


class _GridPlan:
    """Everything the compiled grid matvec needs, in permuted row order."""

    def __init__(self, s, t, fine, k0, coff0, levels, rest):
        self.s, self.t, self.fine, self.k0, self.coff0 = s, t, fine, k0, coff0
        self.levels = levels
        self.rest = rest

    def apply(self, up):
        y = np.zeros(self.s.shape[0], dtype=np.complex128)
        near_apply(self.s, self.fine, self.t, up, self.coff0, y)
        for shift, coff, inter, centers, radii, order in self.levels:
            M = sector_moments(self.t, up, coff, centers, radii, order)
            far_apply(self.s, self.fine >> shift, inter, centers, radii, M, order, y)
        if self.rest is not None:
            y += self.rest @ up
        return y


def _interaction_list(q, k, lev):
    """Sectors ``p`` at distance >= 2 from ``q`` whose parents are adjacent to ``q``'s parent."""
    if lev == 0:
        return [p for p in range(k) if _circ_dist(p, q, k) > 1]
    Q, half = q >> 1, k >> 1
    cand = [2 * ((Q + d) % half) + b for d in (-1, 0, 1) for b in (0, 1)]
    return [p for p in cand if _circ_dist(p, q, k) > 1]


def _grid_collisions(ns, n):
    """Nearest-grid distances for knots normalized to the ``omega_n`` grid."""
    ang = np.mod(np.angle(ns), 2 * np.pi)
    j = np.mod(np.rint(ang * n / (2 * np.pi)).astype(np.int64), n)
    return np.abs(ns - np.exp(2j * np.pi * j / n)), j


def _default_h0(epsilon):
    return 2 * rank_bound(1 / 3, 1.0, epsilon)


def build_cv_hss(s, e, epsilon, n=None, leaf_size=DEFAULT_LEAF, h0=None, max_rank=MAX_RANK):
    """Hierarchical approximation of ``C_{s,t}`` with ``t_j = e omega_n**j``.

    Parameters
    ----------
    s : KnotSet or array_like
        ``m`` row knots, all off the grid.
    e : complex
        Grid scale (nonzero).
    epsilon : float
        Entrywise tolerance for every admissible block.
    n : int, optional
        Grid size; defaults to ``m`` (square).
    leaf_size : int
        At or below this size the matrix is stored densely.
    h0 : int, optional
        Target knots per finest sector; default ``2 * rank_bound(1/3, 1, epsilon)``.

    Raises
    ------
    KnotCollisionError
        If a knot coincides with a grid point (to rounding).
    """
    s = as_knots(s)
    e = as_scalar(e, "e", nonzero=True)
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    m = len(s)
    n = m if n is None else int(n)
    if n < 1:
        raise DimensionError("grid size must be positive")
    ns = s.values / e
    dist, _ = _grid_collisions(ns, n)
    if dist.min() <= 2.0 ** -50 * max(1.0, float(np.abs(ns).max())):
        raise KnotCollisionError("a knot coincides with a grid point")
    t = np.exp(2j * np.pi * np.arange(n) / n)
    scale = 1.0 / e
    epsn = eps * abs(e)

    def entry(i, j):
        return scale / (ns[i][:, None] - t[j][None, :])

    if max(m, n) <= leaf_size or n < 2 * MIN_SECTORS:
        db = DenseBlock((0, m), np.arange(n), dense_cauchy(ns, t), reason="fallback")
        return HssApprox((m, n), np.arange(m), np.arange(n), scale, eps, [], [db], entry,
                         meta={"fallback": True, "k0": 1, "levels": 0})
    h0 = _default_h0(eps) if h0 is None else int(h0)
    L = max(0, math.ceil(math.log2(max(n / (MIN_SECTORS * h0), 1.0))))
    k0 = MIN_SECTORS * 2 ** L
    part = sector_partition(ns, (1.0, n), k0)
    perm = part.permutation
    sp_ = ns[perm]
    fine = part.row_sector
    blocks, dense, overflow, plan_levels = [], [], [], []
    for lev in range(L + 1):
        k = MIN_SECTORS * 2 ** lev
        shift = L - lev
        sec = fine >> shift
        roff = np.searchsorted(sec, np.arange(k + 1))
        coff = -(-np.arange(k + 1) * n // k)
        centers = np.exp(1j * np.pi * (2 * np.arange(k) + 1) / k)
        radii = np.ones(k)
        inter = np.full((k, 5 if lev == 0 else 3), -1, dtype=np.int64)
        order = 0
        for q in range(k):
            r0, r1 = int(roff[q]), int(roff[q + 1])
            if r0 == r1:
                continue
            for p in _interaction_list(q, k, lev):
                c0, c1 = int(coff[p]), int(coff[p + 1])
                if c0 == c1:
                    continue
                c = centers[p]
                ds = sp_[r0:r1] - c
                dt = t[c0:c1] - c
                adt = np.abs(dt)
                delta = float(np.abs(ds).min())
                cert = SeparationCertificate(float(adt.max()) / delta, complex(c), delta, float(adt.max()))
                blk = _compressed_block(ds, dt, epsn, cert, max_rank) if cert.theta < 1 else None
                if blk is None:
                    overflow.append((lev, q, p))
                    dense.append(DenseBlock((r0, r1), np.arange(c0, c1),
                                            1.0 / (sp_[r0:r1, None] - t[None, c0:c1]), lev, q, "overflow"))
                    continue
                blk.level, blk.row_sector, blk.col_sector = lev, q, p
                blk.rows, blk.cols = (r0, r1), (c0, c1)
                blk.error_bound /= abs(e)
                blk.taylor_bound /= abs(e)
                blk.truncation_error /= abs(e)
                blocks.append(blk)
                slot = int(np.argmax(inter[q] < 0))
                inter[q, slot] = p
                radii[p] = cert.radius if cert.radius > 0 else 1.0
                order = max(order, taylor_order(cert.theta, cert.delta, epsn / 2))
        plan_levels.append((shift, coff, inter, centers, radii, order))
    for q in range(k0):
        rs = part.rows(q)
        if rs.start == rs.stop:
            continue
        cols = part.extended_cols(q)
        dense.append(DenseBlock((rs.start, rs.stop), cols, 1.0 / (sp_[rs, None] - t[None, cols]), L, q))
    rest = [db for db in dense if db.reason == "overflow"]
    rest = sp.csr_matrix((np.concatenate([db.data.ravel() for db in rest]),
                          (np.concatenate([np.repeat(np.arange(*db.rows), len(db.cols)) for db in rest]),
                           np.concatenate([np.tile(db.cols, db.rows[1] - db.rows[0]) for db in rest]))),
                         shape=(m, n)) if rest else None
    plan = _GridPlan(sp_, t, fine, k0, part.col_offsets.astype(np.int64), plan_levels, rest)
    return HssApprox((m, n), perm, np.arange(n), scale, eps, blocks, dense, entry, overflow=overflow,
                     meta={"k0": k0, "levels": L + 1, "h0": h0, "plan": plan})


# real line --------------------------------------------------------------------

def real_line_hss(s, t, epsilon, leaf_size=32, theta_max=0.5):
    """Hierarchical approximation of ``C_{s,t}`` for real knots.

    The bounding interval of ``s`` and ``t`` is bisected recursively until
    each cell holds at most ``leaf_size`` knots.  A pair of cells is
    admissible once the column cell's series about its midpoint has ratio
    ``theta <= theta_max`` against the row cell; otherwise both are split.
    Already separated sets give a single block.
    """
    sv, tv = _values(s), _values(t)
    if np.abs(sv.imag).max(initial=0) > 0 or np.abs(tv.imag).max(initial=0) > 0:
        raise OffCurveKnotError("real_line_hss needs real knots")
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    sr, tr = sv.real, tv.real
    if np.intersect1d(sr, tr).size:
        raise KnotCollisionError("s and t share a knot")
    rperm = np.argsort(sr, kind="stable")
    cperm = np.argsort(tr, kind="stable")
    ss, ts = sr[rperm], tr[cperm]
    m, n = ss.size, ts.size
    lo = min(ss[0], ts[0])
    hi = max(ss[-1], ts[-1])
    width = hi - lo if hi > lo else 1.0

    def entry(i, j):
        return 1.0 / (sr[i][:, None] - tr[j][None, :])

    blocks, dense = [], []

    def cell(a, b):
        return (int(np.searchsorted(ss, a, "left")), int(np.searchsorted(ss, b, "left")),
                int(np.searchsorted(ts, a, "left")), int(np.searchsorted(ts, b, "left")))

    def try_block(ra, rb, ca, cb, lev):
        if rb == ra or cb == ca:
            return True
        c = 0.5 * (ts[ca] + ts[cb - 1])
        ds = ss[ra:rb] - c
        dt = ts[ca:cb] - c
        adt = np.abs(dt)
        delta = float(np.abs(ds).min())
        if delta == 0:
            return False
        cert = SeparationCertificate(float(adt.max()) / delta, complex(c), delta, float(adt.max()))
        if cert.theta > theta_max:
            return False
        blk = _compressed_block(ds.astype(np.complex128), dt.astype(np.complex128), eps, cert)
        if blk is None:
            return False
        blk.level, blk.rows, blk.cols = lev, (ra, rb), (ca, cb)
        blocks.append(blk)
        return True

    # one-shot: already separated sets
    if m and n and try_block(0, m, 0, n, 0):
        return HssApprox((m, n), rperm, cperm, 1.0, eps, blocks, dense, entry, kind="real",
                         meta={"single_block": True})

    def recurse(ra, rb, ca, cb, a_r, b_r, a_c, b_c, lev):
        if ra == rb or ca == cb:
            return
        if (rb - ra) + (cb - ca) <= leaf_size or lev > 60:
            dense.append(DenseBlock((ra, rb), np.arange(ca, cb), 1.0 / (ss[ra:rb, None] - ts[None, ca:cb]), lev))
            return
        if lev > 0 and try_block(ra, rb, ca, cb, lev):
            return
        # split the row cell and the column cell at their midpoints
        mr, mc = 0.5 * (a_r + b_r), 0.5 * (a_c + b_c)
        rm = int(np.searchsorted(ss, mr, "left"))
        cm = int(np.searchsorted(ts, mc, "left"))
        rparts = [(ra, rm, a_r, mr), (rm, rb, mr, b_r)]
        cparts = [(ca, cm, a_c, mc), (cm, cb, mc, b_c)]
        for (r0, r1, ar, br) in rparts:
            for (c0, c1, ac, bc) in cparts:
                recurse(r0, r1, c0, c1, ar, br, ac, bc, lev + 1)

    recurse(0, m, 0, n, lo, hi + 1e-12 * width, lo, hi + 1e-12 * width, 0)
    return HssApprox((m, n), rperm, cperm, 1.0, eps, blocks, dense, entry, kind="real",
                     meta={"single_block": False})


# matvec and solve ----------------------------------------------------------

def hss_matvec(H, u):
    """``H @ u`` (approximates ``C @ u`` within ``n epsilon ||u||_inf``)."""
    return H.matvec(u)


def condition_estimate(H, iters=COND_ITERS, seed=0):
    """Power-iteration estimate of ``||C||_2 ||C^{-1}||_2`` on the compressed form."""
    if H._cond is not None:
        return H._cond
    n = H.shape[0]
    rng = np.random.default_rng(seed)
    fwd = H.hodlr()
    bwd = H.hodlr(transpose=True)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    big = 0.0
    for _ in range(iters):
        y = np.conj(H.rmatvec(np.conj(H.matvec(x))))
        big = np.linalg.norm(y)
        if big == 0:
            break
        x = y / big
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    small = 0.0
    for _ in range(iters):
        y = fwd.solve(x)
        y = np.conj(bwd.solve(np.conj(y)))
        small = np.linalg.norm(y)
        if not np.isfinite(small) or small == 0:
            small = np.inf
            break
        x = y / small
    kappa = math.sqrt(big) * math.sqrt(small) if big > 0 else math.inf
    H._cond = kappa
    return kappa


def hss_solve(H, b, transpose=False, refine=1, check_condition=True):
    """Solve ``C x = b`` (or ``C^T x = b``) through the compressed form.

    Uses a HODLR factorization built from ``H``'s entries, then ``refine``
    steps of iterative refinement against ``H.matvec``.  Any pivot or
    capacitance block with condition above ``1/(n epsilon)``, or an overall
    power-iteration condition estimate above the same limit, raises
    :class:`IllConditionedError`.
    """
    b = np.asarray(b, dtype=np.complex128)
    n = H.shape[0]
    if H.shape[0] != H.shape[1]:
        raise DimensionError("solve needs a square matrix")
    if b.shape[0] != n:
        raise DimensionError(f"b has length {b.shape[0]}, expected {n}")
    limit = 1.0 / (n * H.epsilon)
    # a Cauchy matrix over distinct knots is never exactly singular, so a
    # numerically singular pivot is reported as ill-conditioning
    try:
        if H.is_dense_only:
            M = H.to_dense()
            x, cond = dense_solve(M.T if transpose else M, b, return_condition=True)
            if check_condition and cond > limit:
                raise IllConditionedError(f"condition estimate {cond:.2e} exceeds 1/(n eps) = {limit:.2e}")
            return x
        fac = H.hodlr(transpose=transpose)
        kappa = condition_estimate(H) if check_condition else 0.0
    except SingularMatrixError as exc:
        if H.kind == "cauchy-like":
            raise
        raise IllConditionedError(f"numerically singular: {exc}") from exc
    if not kappa <= limit:
        raise IllConditionedError(f"condition estimate {kappa:.2e} exceeds 1/(n eps) = {limit:.2e}")
    mv = H.rmatvec if transpose else H.matvec
    rp, cp = (H.col_perm, H.row_perm) if transpose else (H.row_perm, H.col_perm)

    def solve(rhs):
        z = fac.solve(rhs[rp])
        out = np.empty_like(z)
        out[cp] = z
        return out

    x = solve(b)
    for _ in range(refine):
        x = x + solve(b - mv(x))
    if not np.all(np.isfinite(x)):
        raise IllConditionedError("solve produced non-finite values")
    return x

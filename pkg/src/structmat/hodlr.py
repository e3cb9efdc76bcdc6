"""Hierarchically off-diagonal low-rank (HODLR) factorization.

Off-diagonal blocks of a binary index tree are compressed by adaptive cross
approximation (ACA) straight from an entry function; the solve applies the
Woodbury identity recursively.  Every pivot block and capacitance matrix is
screened for conditioning so the solver fails closed instead of returning
a silently wrong answer.
"""

import warnings

import numpy as np
import scipy.linalg as sla

from .exceptions import IllConditionedError, SingularMatrixError

_EPS = np.finfo(float).eps


def _recompress(U, V, tol):
    """Truncate ``U V^T`` by QR + SVD at ``tol`` relative to the top singular value."""
    if U.shape[1] == 0:
        return U, V
    Qu, Ru = np.linalg.qr(U)
    Qv, Rv = np.linalg.qr(V)
    W, sv, Zh = np.linalg.svd(Ru @ Rv.T)
    if sv[0] == 0:
        return U[:, :0], V[:, :0]
    r = max(1, int(np.sum(sv > tol * sv[0])))
    return (Qu @ W[:, :r]) * sv[:r], Qv @ Zh[:r].T


def aca(entry, rows, cols, tol, max_rank=None, rng=None):
    """Partially pivoted adaptive cross approximation of ``entry(rows, cols)``.

    Returns ``U, V`` with the block approximately ``U @ V.T``.  A random
    sample of entries checks the result; on failure the block is formed
    densely and truncated by SVD instead.
    """
    m, p = len(rows), len(cols)
    kmax = min(m, p) if max_rank is None else min(m, p, max_rank)
    U = np.zeros((m, kmax), dtype=np.complex128)
    V = np.zeros((p, kmax), dtype=np.complex128)
    used = np.zeros(m, dtype=bool)
    i, k, norm2, misses = 0, 0, 0.0, 0
    while k < kmax:
        used[i] = True
        r = entry(rows[i:i + 1], cols)[0] - U[i, :k] @ V[:, :k].T
        j = int(np.argmax(np.abs(r)))
        if np.abs(r[j]) <= 1e-300:
            misses += 1
            free = np.flatnonzero(~used)
            if free.size == 0 or misses > 3:
                break
            i = int(free[0])
            continue
        v = r / r[j]
        u = entry(rows, cols[j:j + 1])[:, 0] - U[:, :k] @ V[j, :k]
        cross = (U[:, :k].conj().T @ u) * (V[:, :k].conj().T @ v)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        norm2 += 2 * cross.sum().real + (nu * nv) ** 2
        U[:, k], V[:, k] = u, v
        k += 1
        if nu * nv <= tol * np.sqrt(max(norm2, 0.0)):
            break
        cand = np.abs(u)
        cand[used] = -1
        i = int(np.argmax(cand))
        if cand[i] < 0:
            break
    U, V = U[:, :k], V[:, :k]
    rng = np.random.default_rng(12345) if rng is None else rng
    si = rng.integers(0, m, size=min(32, m))
    sj = rng.integers(0, p, size=min(32, p))
    exact = entry(rows[si], cols[sj])
    approx = U[si] @ V[sj].T
    ref = max(np.abs(exact).max(), np.sqrt(norm2 / max(m * p, 1)))
    if np.abs(exact - approx).max() > 10 * tol * max(ref, 1e-300) or k == kmax and k < min(m, p):
        full = entry(rows, cols)
        W, sv, Zh = np.linalg.svd(full, full_matrices=False)
        r = int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
        return W[:, :r] * sv[:r], Zh[:r].T
    return _recompress(U, V, tol)


class _Node:
    __slots__ = ("lo", "hi", "dense", "left", "right", "U12", "V12", "U21", "V21",
                 "lu", "Y1", "Y2", "K")

    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        self.dense = self.left = self.right = None
        self.U12 = self.V12 = self.U21 = self.V21 = None
        self.lu = self.Y1 = self.Y2 = self.K = None

    @property
    def is_leaf(self):
        return self.dense is not None


class HodlrMatrix:
    """HODLR approximation of a square matrix given by ``entry(rows, cols)``.

    Parameters
    ----------
    entry : callable
        ``entry(i, j)`` returns the dense sub-block for index arrays.
    n : int
    tol : float
        Relative ACA / truncation tolerance for off-diagonal blocks.
    leaf_size : int
    cond_limit : float
        Largest admissible condition estimate for any pivot or
        capacitance block.
    """

    def __init__(self, entry, n, tol, leaf_size=64, cond_limit=None, _root=None):
        self.n = n
        self.tol = tol
        self.leaf_size = leaf_size
        self.cond_limit = cond_limit if cond_limit is not None else 1.0 / (n * max(tol, _EPS))
        self._factored = False
        self.root = _root if _root is not None else self._build(entry, 0, n)

    def _build(self, entry, lo, hi):
        node = _Node(lo, hi)
        idx = np.arange(lo, hi)
        if hi - lo <= self.leaf_size:
            node.dense = entry(idx, idx)
            return node
        mid = (lo + hi) // 2
        top, bot = np.arange(lo, mid), np.arange(mid, hi)
        node.U12, node.V12 = aca(entry, top, bot, self.tol)
        node.U21, node.V21 = aca(entry, bot, top, self.tol)
        node.left = self._build(entry, lo, mid)
        node.right = self._build(entry, mid, hi)
        return node

    # structure ---------------------------------------------------------

    def ranks(self):
        out = []

        def walk(nd, depth):
            if nd.is_leaf:
                return
            out.append((depth, nd.U12.shape[1], nd.U21.shape[1]))
            walk(nd.left, depth + 1)
            walk(nd.right, depth + 1)

        walk(self.root, 0)
        return out

    def transpose(self):
        def tr(nd):
            t = _Node(nd.lo, nd.hi)
            if nd.is_leaf:
                t.dense = nd.dense.T
                return t
            t.U12, t.V12 = nd.V21, nd.U21
            t.U21, t.V21 = nd.V12, nd.U12
            t.left, t.right = tr(nd.left), tr(nd.right)
            return t

        return HodlrMatrix(None, self.n, self.tol, self.leaf_size, self.cond_limit, _root=tr(self.root))

    def matvec(self, x):
        x = np.asarray(x, dtype=np.complex128)
        return self._mv(self.root, x)

    def _mv(self, nd, x):
        if nd.is_leaf:
            return nd.dense @ x
        h = nd.left.hi - nd.lo
        xt, xb = x[:h], x[h:]
        yt = self._mv(nd.left, xt) + nd.U12 @ (nd.V12.T @ xb)
        yb = self._mv(nd.right, xb) + nd.U21 @ (nd.V21.T @ xt)
        return np.concatenate([yt, yb])

    def to_dense(self):
        return self.matvec(np.eye(self.n, dtype=np.complex128))

    # factorization -----------------------------------------------------

    def _check(self, lu, anorm, what):
        diag = np.abs(np.diag(lu[0]))
        if diag.min() <= lu[0].shape[0] * _EPS * np.abs(lu[0]).max():
            raise SingularMatrixError(f"{what} is numerically singular")
        rcond, _ = sla.lapack.zgecon(lu[0], anorm, norm="1")
        if rcond * self.cond_limit < 1:
            raise IllConditionedError(f"{what} has condition estimate {1 / max(rcond, 1e-300):.2e} "
                                      f"above the limit {self.cond_limit:.2e}")

    def factor(self):
        if not self._factored:
            self._factor(self.root)
            self._factored = True
        return self

    def _factor(self, nd):
        if nd.is_leaf:
            with warnings.catch_warnings():
                # exact zero pivots are reported by _check
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                nd.lu = sla.lu_factor(nd.dense, check_finite=False)
            self._check(nd.lu, np.linalg.norm(nd.dense, 1), "a diagonal pivot block")
            return
        self._factor(nd.left)
        self._factor(nd.right)
        nd.Y1 = self._solve(nd.left, nd.U12)
        nd.Y2 = self._solve(nd.right, nd.U21)
        r1, r2 = nd.U12.shape[1], nd.U21.shape[1]
        K = np.eye(r1 + r2, dtype=np.complex128)
        K[:r1, r1:] = nd.V12.T @ nd.Y2
        K[r1:, :r1] = nd.V21.T @ nd.Y1
        if r1 + r2:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                nd.K = sla.lu_factor(K, check_finite=False)
            self._check(nd.K, np.linalg.norm(K, 1), "an auxiliary capacitance matrix")

    def _solve(self, nd, b):
        if nd.is_leaf:
            return sla.lu_solve(nd.lu, b, check_finite=False)
        h = nd.left.hi - nd.lo
        x1 = self._solve(nd.left, b[:h])
        x2 = self._solve(nd.right, b[h:])
        r1 = nd.U12.shape[1]
        if nd.K is None:
            return np.concatenate([x1, x2])
        z = np.concatenate([nd.V12.T @ x2, nd.V21.T @ x1])
        w = sla.lu_solve(nd.K, z, check_finite=False)
        return np.concatenate([x1 - nd.Y1 @ w[:r1], x2 - nd.Y2 @ w[r1:]])

    def solve(self, b):
        self.factor()
        b = np.asarray(b, dtype=np.complex128)
        return self._solve(self.root, b)

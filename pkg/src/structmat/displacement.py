"""Sylvester displacement generators and generator-level algebra.

A generator ``(A, B, F, G)`` represents the unique ``M`` with
``A M - M B = F G^T`` whenever the operator ``M -> AM - MB`` is
nonsingular.  Operators are unit f-circulant shifts ``Z_e``, their
transposes, or diagonal matrices ``D_s``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ._validation import as_factor, as_matrix, as_scalar, as_vector, check_epsilon
from .core import circulant_matvec, dense_cauchy, dense_f_circulant, dense_solve, reversal, shift_matrix
from .exceptions import (ClassMismatchError, DimensionError, InconsistentInputError,
                         SingularOperatorError)
from .knots import KnotSet, as_knots

_SHIFT_KINDS = ("shift", "shift_t")
_OP_TOL = 1e-14
_EXACT_CHUNK = 512


class OperatorDescriptor:
    """One operator matrix: ``Z_e`` (``shift``), ``Z_e^T`` (``shift_t``) or ``D_s`` (``diag``).

    Use the class methods :meth:`shift`, :meth:`shift_t` and
    :meth:`diagonal` rather than the raw constructor.
    """

    __slots__ = ("kind", "param", "knots", "n")

    def __init__(self, kind, param=None, n=None, knots=None):
        if kind not in ("shift", "shift_t", "diag"):
            raise InconsistentInputError(f"unknown operator kind {kind!r}")
        self.kind = kind
        if kind == "diag":
            self.knots = as_knots(knots if knots is not None else param)
            self.param = None
            self.n = len(self.knots)
        else:
            if n is None or int(n) < 1:
                raise DimensionError("shift operators need a positive size n")
            self.param = as_scalar(0 if param is None else param, "e")
            self.knots = None
            self.n = int(n)

    @classmethod
    def shift(cls, e, n):
        return cls("shift", e, n)

    @classmethod
    def shift_t(cls, e, n):
        return cls("shift_t", e, n)

    @classmethod
    def diagonal(cls, s):
        return cls("diag", knots=s)

    @property
    def is_shift(self):
        return self.kind in _SHIFT_KINDS

    def __eq__(self, other):
        if not isinstance(other, OperatorDescriptor) or other.kind != self.kind or other.n != self.n:
            return False
        if self.kind == "diag":
            return np.array_equal(self.knots.values, other.knots.values)
        return self.param == other.param

    def __hash__(self):
        return hash((self.kind, self.n, self.param if self.knots is None else self.knots.key))

    def __repr__(self):
        if self.kind == "diag":
            return f"D_s(n={self.n})"
        return f"Z_{self.param}{'^T' if self.kind == 'shift_t' else ''}(n={self.n})"

    def dense(self):
        if self.kind == "diag":
            return np.diag(self.knots.values)
        Z = shift_matrix(self.param, self.n)
        return Z.T if self.kind == "shift_t" else Z

    def transpose(self):
        if self.kind == "diag":
            return self
        return OperatorDescriptor("shift_t" if self.kind == "shift" else "shift", self.param, self.n)

    def with_param(self, e):
        return OperatorDescriptor(self.kind, e, self.n)

    def apply_left(self, X):
        """``A @ X`` for a vector or block ``X``."""
        X = np.asarray(X, dtype=np.complex128)
        if self.kind == "diag":
            s = self.knots.values
            return s * X if X.ndim == 1 else s[:, None] * X
        if self.kind == "shift":
            Y = np.roll(X, 1, axis=0)
            Y[0] = Y[0] * self.param
        else:
            Y = np.roll(X, -1, axis=0)
            Y[-1] = Y[-1] * self.param
        return Y

    def apply_right(self, X):
        """``X @ A`` for a block ``X`` (rows times operator)."""
        X = np.asarray(X, dtype=np.complex128)
        return self.transpose().apply_left(X.T).T

    def eigenvalues(self):
        if self.kind == "diag":
            return self.knots.values
        if self.param == 0:
            return np.zeros(self.n, dtype=np.complex128)
        return self.param ** (1.0 / self.n) * np.exp(2j * np.pi * np.arange(self.n) / self.n)


def _pattern(A, B):
    key = (A.kind, B.kind)
    return {
        ("shift", "shift"): "t",
        ("shift_t", "shift_t"): "t2",
        ("shift", "shift_t"): "h",
        ("shift_t", "shift"): "h2",
        ("diag", "shift"): "v",
        ("shift_t", "diag"): "vt",
        ("diag", "diag"): "c",
    }.get(key)


@dataclass(frozen=True, eq=False)
class DisplacementGenerator:
    """Generator ``(F, G)`` of ``M`` under ``A M - M B = F G^T``.

    Attributes
    ----------
    A, B : OperatorDescriptor
    F, G : ndarray, shape (n, d)
    """

    A: OperatorDescriptor
    B: OperatorDescriptor
    F: np.ndarray
    G: np.ndarray
    pattern: str = field(init=False, repr=False)

    def __post_init__(self):
        n = self.A.n
        if self.B.n != n:
            raise DimensionError(f"operator sizes differ: {self.A.n} vs {self.B.n}")
        F = as_factor(self.F, n, "F")
        G = as_factor(self.G, n, "G")
        if F.shape[1] != G.shape[1]:
            raise DimensionError(f"F has {F.shape[1]} columns but G has {G.shape[1]}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "pattern", _pattern(self.A, self.B))

    @property
    def n(self):
        return self.A.n

    @property
    def length(self):
        return self.F.shape[1]

    d = length

    @property
    def structure_tag(self):
        """Class label: T, H, V, VT, C and the DFT-based refinements."""
        p = self.pattern
        if p in ("t", "t2"):
            return "T"
        if p in ("h", "h2"):
            return "H"
        if p == "v":
            return "FV" if self.A.knots.is_grid else "V"
        if p == "vt":
            return "VTF" if self.B.knots.is_grid else "VT"
        if p == "c":
            gs, gt = self.A.knots.is_grid, self.B.knots.is_grid
            return "FCF" if gs and gt else "CF" if gs else "CV" if gt else "C"
        if (self.A.kind, self.B.kind) == ("shift", "diag"):
            return "V^-1"
        if (self.A.kind, self.B.kind) == ("diag", "shift_t"):
            return "V^-T"
        return "other"

    def with_factors(self, F, G):
        return DisplacementGenerator(self.A, self.B, F, G)

    def __repr__(self):
        return f"DisplacementGenerator({self.structure_tag}, n={self.n}, d={self.length})"


# constructors -----------------------------------------------------------

def displacement_dense(M, A, B):
    """Form ``A M - M B`` densely."""
    M = as_matrix(M, square=True)
    if M.shape[0] != A.n or A.n != B.n:
        raise DimensionError("operator and matrix sizes differ")
    return A.apply_left(M) - B.apply_right(M)


def generator_from_dense(M, A, B, tol=1e-10):
    """Rank-revealing SVD generator of ``M``.

    Singular values at or below ``tol * sigma_max`` are dropped, so the
    length equals the numerical displacement rank.
    """
    R = displacement_dense(M, A, B)
    n = R.shape[0]
    U, sv, Vh = np.linalg.svd(R)
    if sv.size == 0 or sv[0] == 0:
        r = 0
    else:
        r = int(np.sum(sv > tol * sv[0]))
    F = U[:, :r] * sv[:r]
    G = Vh[:r].T
    return DisplacementGenerator(A, B, F.reshape(n, r), G.reshape(n, r))


def cauchy_generator(s, t):
    """Unit generator of ``C_{s,t}`` under ``(D_s, D_t)``."""
    s, t = as_knots(s), as_knots(t)
    s.check_disjoint(t)
    ones = np.ones((len(s), 1), dtype=np.complex128)
    return DisplacementGenerator(OperatorDescriptor.diagonal(s), OperatorDescriptor.diagonal(t), ones, ones)


def vandermonde_generator(s, e=0):
    """Generator of ``V_s`` under ``(D_s, Z_e)``: ``F = s**n - e``, ``G = e_n``."""
    s = as_knots(s)
    n = len(s)
    G = np.zeros((n, 1), dtype=np.complex128)
    G[-1] = 1
    return DisplacementGenerator(OperatorDescriptor.diagonal(s), OperatorDescriptor.shift(e, n),
                                 (s.power() - e).reshape(n, 1), G)


def identity_generator(e, f, n):
    """Length-1 generator of ``I`` under ``(Z_e, Z_f)``: ``(e - f) e_1 e_n^T``."""
    F = np.zeros((n, 1), dtype=np.complex128)
    G = np.zeros((n, 1), dtype=np.complex128)
    F[0] = e - f
    G[-1] = 1
    return DisplacementGenerator(OperatorDescriptor.shift(e, n), OperatorDescriptor.shift(f, n), F, G)


def toeplitz_generator(first_col, first_row, e=1, f=-1):
    """Length-2 generator of a Toeplitz matrix under ``(Z_e, Z_f)``.

    Parameters
    ----------
    first_col, first_row : array_like
        ``t_i`` (i >= 0) down the first column and ``t_{-j}`` along the row.
    """
    c = as_vector(first_col, "first_col")
    r = as_vector(first_row, "first_row")
    n = c.shape[0]
    if r.shape[0] != n:
        raise DimensionError("first_col and first_row lengths differ")
    if c[0] != r[0]:
        raise InconsistentInputError("first_col[0] and first_row[0] differ")
    e = as_scalar(e, "e")
    f = as_scalar(f, "f")
    # t_k for k in -(n-1)..(n-1)
    pos = c
    neg = r
    t = lambda k: pos[k] if k >= 0 else neg[-k]
    rr = np.empty(n, dtype=np.complex128)
    for j in range(n - 1):
        rr[j] = e * t(n - 1 - j) - t(-1 - j)
    rr[n - 1] = (e - f) * t(0)
    cc = np.zeros(n, dtype=np.complex128)
    for i in range(1, n):
        cc[i] = t(i - n) - f * t(i)
    F = np.zeros((n, 2), dtype=np.complex128)
    G = np.zeros((n, 2), dtype=np.complex128)
    F[0, 0] = 1
    F[:, 1] = cc
    G[:, 0] = rr
    G[-1, 1] = 1
    return DisplacementGenerator(OperatorDescriptor.shift(e, n), OperatorDescriptor.shift(f, n), F, G)


# nonsingularity --------------------------------------------------------

def _check_operator(gen):
    A, B, p = gen.A, gen.B, gen.pattern
    if p in ("t", "t2", "h", "h2"):
        e, f = A.param, B.param
        if abs(e - f) <= _OP_TOL * max(1.0, abs(e), abs(f)):
            raise SingularOperatorError(f"pattern ({p}): operator parameters coincide (e = f = {e})")
    elif p in ("v", "vt"):
        ks = (A if p == "v" else B).knots
        e = (B if p == "v" else A).param
        gap = np.abs(ks.power() - e)
        scale = max(1.0, abs(e), ks.max_magnitude ** len(ks))
        if gap.min() <= _OP_TOL * scale:
            raise SingularOperatorError(f"pattern ({p}): some s_i**n equals e = {e}")
    elif p == "c":
        try:
            A.knots.check_disjoint(B.knots)
        except Exception as exc:
            raise SingularOperatorError(f"pattern (c): {exc}") from exc
    else:
        ea, eb = A.eigenvalues(), B.eigenvalues()
        dist = np.abs(ea[:, None] - eb[None, :]).min()
        if dist <= _OP_TOL * max(1.0, np.abs(ea).max(), np.abs(eb).max()):
            raise SingularOperatorError("operator spectra intersect")


# recovery ---------------------------------------------------------------

def recover_dense(gen):
    """Dense ``M`` from its generator by the explicit recovery formulas.

    Supported pairs: ``(Z_e, Z_f)``, ``(Z_e^T, Z_f^T)``, ``(Z_e, Z_f^T)``,
    ``(Z_e^T, Z_f)``, ``(D_s, Z_e)``, ``(Z_e^T, D_s)`` and ``(D_s, D_t)``.
    Any other pair is recovered by a dense Sylvester solve.

    Raises
    ------
    SingularOperatorError
        If ``M -> AM - MB`` is singular for the given parameters.
    """
    _check_operator(gen)
    n, p = gen.n, gen.pattern
    F, G = gen.F, gen.G
    J = reversal(n)
    M = np.zeros((n, n), dtype=np.complex128)
    if p in ("t", "t2", "h", "h2"):
        e, f = gen.A.param, gen.B.param
        for j in range(gen.length):
            fj, gj = F[:, j], G[:, j]
            if p == "t":
                M += dense_f_circulant(e, fj) @ dense_f_circulant(f, gj[::-1])
            elif p == "t2":
                M += dense_f_circulant(e, fj[::-1]) @ dense_f_circulant(f, gj)
            elif p == "h":
                M += dense_f_circulant(e, fj) @ dense_f_circulant(f, gj)
            else:
                M += dense_f_circulant(e, fj[::-1]) @ dense_f_circulant(f, gj[::-1])
        if p == "t2":
            M = J @ M @ J
        elif p == "h":
            M = M @ J
        elif p == "h2":
            M = J @ M
        return M / (e - f)
    if p == "v":
        s, e = gen.A.knots.values, gen.B.param
        V = np.vander(s, n, increasing=True)
        for j in range(gen.length):
            M += (F[:, j, None] * V) @ dense_f_circulant(e, G[::-1, j])
        return M / (gen.A.knots.power() - e)[:, None]
    if p == "vt":
        e, s = gen.A.param, gen.B.knots.values
        Vt = np.vander(s, n, increasing=True).T
        for j in range(gen.length):
            M += dense_f_circulant(e, F[::-1, j]).T @ (Vt * G[:, j])
        return M / (e - gen.B.knots.power())[None, :]
    if p == "c":
        C = dense_cauchy(gen.A.knots.values, gen.B.knots.values)
        return (F @ G.T) * C
    # A M + M (-B) = F G^T
    return sla.solve_sylvester(gen.A.dense(), -gen.B.dense(), gen.F @ gen.G.T)


def _power_matvec(s, x):
    """Exact ``V_s @ x`` by Horner (x holds coefficients)."""
    y = np.zeros(s.shape[0], dtype=np.complex128)
    for c in x[::-1]:
        y = y * s + c
    return y


def _power_rmatvec(s, y):
    """Exact ``V_s^T @ y``: power sums ``sum_i s_i**k y_i`` in row chunks."""
    n = s.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for lo in range(0, n, _EXACT_CHUNK):
        ss = s[lo:lo + _EXACT_CHUNK]
        out += np.vander(ss, n, increasing=True).T @ y[lo:lo + _EXACT_CHUNK]
    return out


def _cauchy_exact(s, t, x):
    out = np.empty(s.shape[0], dtype=np.complex128)
    for lo in range(0, s.shape[0], _EXACT_CHUNK):
        out[lo:lo + _EXACT_CHUNK] = dense_cauchy(s[lo:lo + _EXACT_CHUNK], t) @ x
    return out


def _zt_matvec(e, x, u):
    """``Z_e(x)^T @ u`` using ``Z_e(x)^T = J Z_e(x) J``."""
    return circulant_matvec(e, x, u[::-1])[::-1]


def generator_matvec(gen, u, epsilon=None):
    """``M @ u`` from the generator without forming ``M``.

    Shift patterns use FFT-based f-circulant products.  Vandermonde and
    Cauchy patterns use exact O(n^2) kernels when ``epsilon`` is ``None``
    and the compressed approximate kernels otherwise.
    """
    _check_operator(gen)
    eps = check_epsilon(epsilon)
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim == 2:
        return np.column_stack([generator_matvec(gen, u[:, k], eps) for k in range(u.shape[1])]) \
            if u.shape[1] else np.zeros((gen.n, 0), dtype=np.complex128)
    n, p = gen.n, gen.pattern
    if u.shape[0] != n:
        raise DimensionError(f"u has length {u.shape[0]}, expected {n}")
    F, G = gen.F, gen.G
    y = np.zeros(n, dtype=np.complex128)
    if p in ("t", "t2", "h", "h2"):
        e, f = gen.A.param, gen.B.param
        if p == "t2":
            u = u[::-1]
        elif p == "h":
            u = u[::-1]
        for j in range(gen.length):
            fj, gj = F[:, j], G[:, j]
            if p == "t":
                w = circulant_matvec(f, gj[::-1], u)
                y += circulant_matvec(e, fj, w)
            elif p == "t2":
                y += circulant_matvec(e, fj[::-1], circulant_matvec(f, gj, u))
            elif p == "h":
                y += circulant_matvec(e, fj, circulant_matvec(f, gj, u))
            else:
                y += circulant_matvec(e, fj[::-1], circulant_matvec(f, gj[::-1], u))
        if p in ("t2", "h2"):
            y = y[::-1]
        return y / (e - f)
    if p == "v":
        s, e = gen.A.knots, gen.B.param
        for j in range(gen.length):
            w = circulant_matvec(e, G[::-1, j], u)
            y += F[:, j] * _vmatvec(s, w, eps)
        return y / (s.power() - e)
    if p == "vt":
        e, s = gen.A.param, gen.B.knots
        w0 = u / (e - s.power())
        for j in range(gen.length):
            y += _zt_matvec(e, F[::-1, j], _vtmatvec(s, G[:, j] * w0, eps))
        return y
    if p == "c":
        s, t = gen.A.knots, gen.B.knots
        if eps is None:
            for j in range(gen.length):
                y += F[:, j] * _cauchy_exact(s.values, t.values, G[:, j] * u)
            return y
        from .solvers.cauchy import CauchyLikeOperand, cauchy_any_knots_matvec
        return cauchy_any_knots_matvec(CauchyLikeOperand(s, t, F, G), u, eps)
    return recover_dense(gen) @ u


def _vmatvec(s, x, eps):
    if s.is_grid:
        g = s.grid_scale
        return np.fft.ifft(g ** np.arange(len(s)) * x) * len(s)
    if eps is None:
        return _power_matvec(s.values, x)
    from .solvers.vandermonde import vandermonde_matvec
    return vandermonde_matvec(s, x, eps)


def _vtmatvec(s, y, eps):
    if s.is_grid:
        g = s.grid_scale
        return g ** np.arange(len(s)) * (np.fft.ifft(y) * len(s))
    if eps is None:
        return _power_rmatvec(s.values, y)
    from .solvers.vandermonde import vandermonde_transposed_matvec
    return vandermonde_transposed_matvec(s, y, eps)


def vandermonde_apply(s, X, transpose=False, epsilon=None):
    """``V_s @ X`` or ``V_s^T @ X`` for a vector or block; FFT on grid knots."""
    s = as_knots(s)
    X = np.asarray(X, dtype=np.complex128)
    fn = _vtmatvec if transpose else _vmatvec
    eps = check_epsilon(epsilon)
    if X.ndim == 1:
        return fn(s, X, eps)
    return np.column_stack([fn(s, X[:, k], eps) for k in range(X.shape[1])]) if X.shape[1] \
        else np.zeros((len(s), 0), dtype=np.complex128)


def generator_rmatvec(gen, u, epsilon=None):
    """``M^T @ u`` through the transposed generator."""
    return generator_matvec(generator_transpose(gen), u, epsilon)


# algebra ------------------------------------------------------------------

def generator_transpose(gen):
    """Generator of ``M^T`` under ``(B^T, A^T)`` with ``F' = -G``, ``G' = F``."""
    return DisplacementGenerator(gen.B.transpose(), gen.A.transpose(), -gen.G, gen.F)


def generator_product(gen_m, gen_n, epsilon=None):
    """Generator of ``MN`` under ``(A, C)`` of length ``d_M + d_N``.

    ``F = [F_M | M F_N]`` and ``G = [N^T G_M | G_N]``.
    """
    if gen_m.B != gen_n.A:
        raise ClassMismatchError(f"middle operators differ: {gen_m.B!r} vs {gen_n.A!r}")
    MF = generator_matvec(gen_m, gen_n.F, epsilon)
    NtG = generator_rmatvec(gen_n, gen_m.G, epsilon)
    n = gen_m.n
    F = np.hstack([gen_m.F, MF.reshape(n, -1)])
    G = np.hstack([NtG.reshape(n, -1), gen_n.G])
    return DisplacementGenerator(gen_m.A, gen_n.B, F, G)


def dense_generator_solver(gen, rhs, transpose=False):
    """Reference solve capability: recover ``M`` densely and LU-solve."""
    M = recover_dense(gen)
    return dense_solve(M.T if transpose else M, rhs)


def generator_inverse(gen, solver=None):
    """Generator of ``M^{-1}`` under ``(B, A)``.

    ``F' = -M^{-1} F`` and ``G' = M^{-T} G``: ``2d`` solves in total.

    Parameters
    ----------
    solver : callable, optional
        ``solver(gen, rhs, transpose=False)`` returning ``M^{-1} rhs`` (or
        ``M^{-T} rhs``).  Defaults to :func:`dense_generator_solver`.
    """
    solver = dense_generator_solver if solver is None else solver
    n, d = gen.n, gen.length
    if d == 0:
        return DisplacementGenerator(gen.B, gen.A, gen.F, gen.G)
    Fi = -np.asarray(solver(gen, gen.F, transpose=False)).reshape(n, d)
    Gi = np.asarray(solver(gen, gen.G, transpose=True)).reshape(n, d)
    return DisplacementGenerator(gen.B, gen.A, Fi, Gi)


def _unit(n, k):
    v = np.zeros(n, dtype=np.complex128)
    v[k] = 1
    return v


def operator_shift_adjust(gen, new_e, side=None, M=None):
    """Move a shift operator's parameter to ``new_e`` at the cost of one column.

    Parameters
    ----------
    side : {'left', 'right'}, optional
        Which operator to change.  Defaults to ``'right'`` when ``B`` is a
        shift, else ``'left'``.
    M : ndarray, optional
        Dense matrix to use for the appended column when the original
        operator pair is singular (for example ``e = f``).
    """
    new_e = as_scalar(new_e, "new_e")
    if side is None:
        side = "right" if gen.B.is_shift else "left"
    op = gen.B if side == "right" else gen.A
    if side not in ("left", "right"):
        raise InconsistentInputError("side must be 'left' or 'right'")
    if not op.is_shift:
        raise ClassMismatchError(f"{side} operator is not a shift")
    old = op.param
    if new_e == old:
        return gen
    n = gen.n

    def mv(x, transpose=False):
        if M is not None:
            Mx = np.asarray(M)
            return (Mx.T if transpose else Mx) @ x
        return generator_rmatvec(gen, x) if transpose else generator_matvec(gen, x)

    first, last = 0, n - 1
    if side == "right":
        if op.kind == "shift":
            fcol, gcol = (old - new_e) * mv(_unit(n, first)), _unit(n, last)
        else:
            fcol, gcol = (old - new_e) * mv(_unit(n, last)), _unit(n, first)
        A, B = gen.A, op.with_param(new_e)
    else:
        if op.kind == "shift":
            fcol, gcol = (new_e - old) * _unit(n, first), mv(_unit(n, last), transpose=True)
        else:
            fcol, gcol = (new_e - old) * _unit(n, last), mv(_unit(n, first), transpose=True)
        A, B = op.with_param(new_e), gen.B
    F = np.hstack([gen.F, fcol[:, None]])
    G = np.hstack([gen.G, gcol[:, None]])
    return DisplacementGenerator(A, B, F, G)


def generator_permute_rows(gen, perm):
    """Generator of ``P M`` where ``(P M)[i] = M[perm[i]]``; needs diagonal ``A``."""
    if gen.A.kind != "diag":
        raise ClassMismatchError("row permutation needs a diagonal left operator")
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(gen.n)):
        raise InconsistentInputError("perm is not a permutation")
    A = OperatorDescriptor.diagonal(gen.A.knots.values[perm])
    return DisplacementGenerator(A, gen.B, gen.F[perm], gen.G)


def generator_compress(gen, tol=1e-12):
    """Shorten a generator by QR + SVD truncation at ``tol`` relative."""
    n, d = gen.n, gen.length
    if d == 0:
        return gen
    Qf, Rf = np.linalg.qr(gen.F)
    Qg, Rg = np.linalg.qr(gen.G)
    U, sv, Vh = np.linalg.svd(Rf @ Rg.T)
    r = int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0
    F = (Qf @ U[:, :r]) * sv[:r]
    G = Qg @ Vh[:r].T
    return DisplacementGenerator(gen.A, gen.B, F.reshape(n, r), G.reshape(n, r))

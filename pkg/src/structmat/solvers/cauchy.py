"""Fast Cauchy and Cauchy-like products and solves.

CV matrices ``C_{s, e omega}`` go through :func:`~structmat.hss.build_cv_hss`
(memoized per knot set, grid scale and tolerance).  Cauchy-like operands
``M = sum_k diag(f_k) C_{s,t} diag(g_k)`` with arbitrary knots are routed by
geometry: a grid on either side uses the CV form directly, knots on a common
line or circle are mapped to the real line, and anything else is re-knotted
onto a grid at the cost of an amplification factor ``||C|| ||C^{-1}||``
that is estimated and checked.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
import threading

import numpy as np
from scipy.spatial import cKDTree

from .._validation import as_factor, as_scalar, as_vector, check_epsilon
from ..core import dense_cauchy, unity_powers
from ..exceptions import (AmplificationError, ClassMismatchError, DimensionError,
                          IllConditionedError, InvalidToleranceError, SingularMatrixError)
from .._kernels import cauchy_direct
from ..hss import HssApprox, build_cv_hss, condition_estimate, hss_solve, real_line_hss
from ..knots import KnotSet, as_knots
from .mobius import arc_index, detect_curve, mobius_circle_to_real, choose_pole, pole_arc

CACHE_SIZE = 16
_cache = OrderedDict()
_lock = threading.Lock()


def clear_cache():
    """Drop all memoized CV approximations."""
    with _lock:
        _cache.clear()


def cached_cv_hss(s, e, epsilon, n=None):
    """Memoized :func:`build_cv_hss` keyed by ``(knots, e, epsilon, n)``."""
    e = as_scalar(e, "e", nonzero=True)
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    # key on the raw values so a cache hit skips knot validation
    raw = s.values if isinstance(s, KnotSet) else np.asarray(s, dtype=np.complex128).ravel()
    key = (raw.tobytes(), e, eps, raw.shape[0] if n is None else int(n))
    with _lock:
        H = _cache.get(key)
        if H is not None:
            _cache.move_to_end(key)
            return H
    H = build_cv_hss(as_knots(s), e, eps, n=n)
    with _lock:
        _cache[key] = H
        while len(_cache) > CACHE_SIZE:
            _cache.popitem(last=False)
    return H


def cv_matvec(s, e, u, epsilon):
    """``C_{s,t} u`` with ``t_j = e omega_n**j``, within ``n epsilon ||u||_inf``.

    Examples
    --------
    >>> s = np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
    >>> y = cv_matvec(s, 1.0, np.ones(8), 1e-8)
    >>> bool(np.allclose(y, dense_cauchy(s, unity_powers(8)) @ np.ones(8)))
    True
    """
    u = np.asarray(u, dtype=np.complex128)
    H = cached_cv_hss(s, e, epsilon, n=u.shape[0])
    return H.matvec(u)


def cv_solve(s, e, b, epsilon, transpose=False):
    """Solve ``C_{s,t} x = b`` (``t_j = e omega_n**j``); fails closed when ill conditioned."""
    b = as_vector(b, "b")
    s = as_knots(s)
    if len(s) != b.shape[0]:
        raise DimensionError(f"b has length {b.shape[0]}, expected {len(s)}")
    return hss_solve(cached_cv_hss(s, e, epsilon), b, transpose=transpose)


# Cauchy-like operands -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CauchyLikeOperand:
    """``M = sum_k diag(F[:, k]) C_{s,t} diag(G[:, k])``.

    This is the matrix with displacement ``D_s M - M D_t = F G^T``.
    """

    s: KnotSet
    t: KnotSet
    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        s, t = as_knots(self.s, "s"), as_knots(self.t, "t")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "F", as_factor(self.F, len(s), "F"))
        object.__setattr__(self, "G", as_factor(self.G, len(t), "G"))
        if self.F.shape[1] != self.G.shape[1] or self.F.shape[1] < 1:
            raise DimensionError("F and G need the same positive number of columns")
        s.check_disjoint(t)

    @classmethod
    def cauchy(cls, s, t):
        s, t = as_knots(s, "s"), as_knots(t, "t")
        return cls(s, t, np.ones(len(s)), np.ones(len(t)))

    @property
    def shape(self):
        return len(self.s), len(self.t)

    @property
    def d(self):
        return self.F.shape[1]

    @property
    def weight(self):
        """``sum_k ||f_k||_inf ||g_k||_inf``, the entrywise error multiplier."""
        return float(np.sum(np.abs(self.F).max(axis=0) * np.abs(self.G).max(axis=0)))

    def transpose(self):
        """``M^T = sum_k diag(g_k) C_{t,s} diag(f_k)`` with ``C_{t,s} = -C_{s,t}^T``."""
        return CauchyLikeOperand(self.t, self.s, -self.G, self.F)

    def entry(self, i, j):
        C = dense_cauchy(self.s.values[i], self.t.values[j])
        return np.einsum("ik,ij,jk->ij", self.F[i], C, self.G[j])

    def to_dense(self):
        return self.entry(np.arange(self.shape[0]), np.arange(self.shape[1]))

    def exact_matvec(self, u):
        """``M u`` by direct O(mn) summation, without forming ``M``."""
        u = np.asarray(u, dtype=np.complex128)
        out = np.zeros(self.shape[0], dtype=np.complex128)
        for k in range(self.d):
            y = np.zeros(self.shape[0], dtype=np.complex128)
            cauchy_direct(self.s.values, self.t.values, np.ascontiguousarray(self.G[:, k] * u), y)
            out += self.F[:, k] * y
        return out


def _grid_scale(t):
    """``e`` if ``t`` is ``e omega_n**j`` (natural order) to 1e-12, else ``None``."""
    if t.is_grid:
        return t.grid_scale
    v = t.values
    e = v[0]
    if e == 0:
        return None
    ref = e * unity_powers(len(v))
    return complex(e) if np.abs(v - ref).max() <= 1e-12 * abs(e) else None


@dataclass(eq=False)
class CauchyLikeApprox(HssApprox):
    """Compressed Cauchy-like matrix built over a CV approximation ``base``."""

    base: HssApprox = None
    F: np.ndarray = None
    G: np.ndarray = None
    transposed: bool = False
    sign: float = 1.0

    @classmethod
    def over(cls, base, F, G, epsilon, entry, transposed=False, sign=1.0):
        shape = base.shape[::-1] if transposed else base.shape
        rp, cp = (base.col_perm, base.row_perm) if transposed else (base.row_perm, base.col_perm)
        return cls(shape, rp, cp, 1.0, epsilon, base.blocks, base.dense_blocks, entry,
                   kind="cauchy-like", meta=dict(base.meta, fallback=False), base=base, F=F, G=G,
                   transposed=transposed, sign=sign)

    @property
    def is_dense_only(self):
        return False

    def _apply(self, u, conj_t):
        u = np.asarray(u, dtype=np.complex128)
        fwd = (self.base.rmatvec if self.transposed else self.base.matvec)
        bwd = (self.base.matvec if self.transposed else self.base.rmatvec)
        A, B = (self.G, self.F) if conj_t else (self.F, self.G)
        op = bwd if conj_t else fwd
        y = 0
        for k in range(self.F.shape[1]):
            y = y + A[:, k] * op(B[:, k] * u)
        return self.sign * y

    def matvec(self, u):
        if np.shape(u)[0] != self.shape[1]:
            raise DimensionError(f"u has length {np.shape(u)[0]}, expected {self.shape[1]}")
        return self._apply(u, False)

    def rmatvec(self, u):
        if np.shape(u)[0] != self.shape[0]:
            raise DimensionError(f"u has length {np.shape(u)[0]}, expected {self.shape[0]}")
        return self._apply(u, True)

    def to_dense(self):
        return self.matvec(np.eye(self.shape[1], dtype=np.complex128))


def cauchy_like_hss(M, epsilon):
    """Compressed form of a Cauchy-like operand with a grid on one side.

    The CV part is built at ``epsilon / M.weight`` so every entry of ``M`` is
    within ``epsilon``.
    """
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    inner = eps / max(M.weight, 1e-300)
    e = _grid_scale(M.t)
    if e is not None:
        base = cached_cv_hss(M.s, e, inner, n=len(M.t))
        return CauchyLikeApprox.over(base, M.F, M.G, eps, M.entry)
    e = _grid_scale(M.s)
    if e is not None:
        base = cached_cv_hss(M.t, e, inner, n=len(M.s))
        # C_{s,t} = -C_{t,s}^T with s the grid
        return CauchyLikeApprox.over(base, M.F, M.G, eps, M.entry, transposed=True, sign=-1.0)
    raise ClassMismatchError("neither knot set is an equally spaced circle grid; "
                             "use cauchy_any_knots_matvec")


def cauchy_like_matvec(M, u, epsilon, return_bound=False):
    """``M u`` for a Cauchy-like operand in CV form.

    The entrywise error is at most ``epsilon``, so the output error is at
    most ``n epsilon ||u||_inf``.  With ``return_bound`` the pair
    ``(y, bound)`` is returned.
    """
    u = as_vector(u, "u")
    if u.shape[0] != M.shape[1]:
        raise DimensionError(f"u has length {u.shape[0]}, expected {M.shape[1]}")
    H = cauchy_like_hss(M, epsilon)
    y = H.matvec(u)
    if return_bound:
        return y, M.shape[1] * H.epsilon * float(np.abs(u).max())
    return y


def cauchy_like_solve(M, b, epsilon, transpose=False):
    """Solve ``M x = b`` for a square Cauchy-like operand in CV form."""
    b = as_vector(b, "b")
    return hss_solve(cauchy_like_hss(M, epsilon), b, transpose=transpose)


# arbitrary knots --------------------------------------------------------------

@dataclass
class RouteReport:
    """How an arbitrary-knot Cauchy operation was carried out."""

    route: str
    bound: float = 0.0
    amplification: float = 1.0
    max_imag: float = 0.0
    details: dict = field(default_factory=dict)


def _line_matvec(M, curve, u, eps):
    c, a = curve.center, curve.param
    s = ((M.s.values - c) / a).real
    t = ((M.t.values - c) / a).real
    imag = max(np.abs(((M.s.values - c) / a).imag).max(), np.abs(((M.t.values - c) / a).imag).max())
    inner = eps / max(M.weight, 1e-300)
    H = real_line_hss(s, t, inner)
    y = 0
    for k in range(M.d):
        y = y + M.F[:, k] * H.matvec(M.G[:, k] * u)
    return y / a, RouteReport("line", M.shape[1] * eps * float(np.abs(u).max()), max_imag=float(imag))


def _circle_matvec(M, curve, u, eps):
    z0, r = curve.center, curve.param.real
    s = (M.s.values - z0) / r
    t = (M.t.values - z0) / r
    # project exactly onto the circle so the Mobius images are real
    s, t = s / np.abs(s), t / np.abs(t)
    sa, ta = arc_index(s), arc_index(t)
    y = np.zeros(M.shape[0], dtype=np.complex128)
    bound, imag, poles = 0.0, 0.0, {}
    umax = float(np.abs(u).max())
    for p in range(3):
        ri = np.flatnonzero(sa == p)
        if ri.size == 0:
            continue
        for q in range(3):
            ci = np.flatnonzero(ta == q)
            if ci.size == 0:
                continue
            h = pole_arc(p, q)
            a = choose_pole(np.concatenate([s[ri], t[ci]]), 2 * np.pi * h / 3, 2 * np.pi * (h + 1) / 3)
            ims = mobius_circle_to_real(s[ri], a)
            imt = mobius_circle_to_real(t[ci], a)
            imag = max(imag, ims.max_imag, imt.max_imag)
            wmax = float(np.abs(ims.row_factor).max() * np.abs(imt.col_factor).max())
            inner = eps / max(M.weight * wmax, 1e-300)
            H = real_line_hss(ims.knots, imt.knots, inner)
            uc = u[ci]
            part = 0
            for k in range(M.d):
                part = part + M.F[ri, k] * ims.row_factor * H.matvec(imt.col_factor * M.G[ci, k] * uc)
            y[ri] += part / r
            bound += ci.size * M.weight * wmax * inner * umax / r
            poles[(p, q)] = a
    return y, RouteReport("circle", bound, max_imag=imag, details={"poles": poles})


def _reknot_grid(s, t):
    """Grid scale for re-knotting: radius 1 after normalization, rotated away from the knots."""
    n = len(t)
    z = np.concatenate([s.values, t.values])
    pw = z ** n
    cand = np.exp(2j * np.pi * (np.arange(4 * n) + 0.5) / (4 * n))
    tree = cKDTree(np.column_stack([pw.real, pw.imag]))
    d, _ = tree.query(np.column_stack([cand.real, cand.imag]))
    best = cand[int(np.argmax(d))]
    return complex(np.exp(1j * np.angle(best) / n))


def reknot_plan(M, epsilon, variant=None, amplification_limit=None):
    """Prepare the re-knotting reduction of an arbitrary-knot operand.

    Two symmetric reductions are possible: ``M = P C_{t,q}^{-1}`` with
    ``P = M C_{t,q}`` (variant ``"right"``) or ``M = C_{q,s}^{-1} P'`` with
    ``P' = C_{q,s} M`` (variant ``"left"``).  Both ``P`` and ``P'`` are
    CV-like.  By default the one whose auxiliary Cauchy matrix has the
    smaller estimated condition number is used.

    Raises
    ------
    AmplificationError
        If the chosen estimate exceeds ``amplification_limit``
        (default ``1/(n epsilon)``).
    """
    eps = check_epsilon(epsilon)
    m, n = M.shape
    if m != n:
        raise DimensionError("re-knotting needs a square operand")
    # shift/scale invariance: C_{as+c, at+c} = C_{s,t} / a
    z = np.concatenate([M.s.values, M.t.values])
    c = z.mean()
    a = float(np.abs(z - c).max()) or 1.0
    s = KnotSet((M.s.values - c) / a)
    t = KnotSet((M.t.values - c) / a)
    e = _reknot_grid(s, t)
    q = KnotSet.grid(e, n)
    limit = 1.0 / (n * eps) if amplification_limit is None else float(amplification_limit)
    Ht = cached_cv_hss(t, e, eps)
    Hs = cached_cv_hss(s, e, eps)
    amp = {}
    for name, H in (("right", Ht), ("left", Hs)):
        if variant in (None, name):
            try:
                amp[name] = condition_estimate(H)
            except (SingularMatrixError, IllConditionedError):
                amp[name] = np.inf
    choice = min(amp, key=amp.get)
    if not amp[choice] <= limit:
        if np.isinf(amp[choice]):
            raise AmplificationError("re-knotting needs a numerically singular auxiliary Cauchy matrix")
        raise AmplificationError(f"re-knotting amplifies errors by about {amp[choice]:.2e} "
                                 f"(limit {limit:.2e})")
    Mn = CauchyLikeOperand(s, t, M.F, M.G)
    ones = np.ones(n, dtype=np.complex128)
    if choice == "right":
        # D_s P - P D_q = F (C_{t,q}^T G) ^T + (M 1) 1^T
        CtG = np.column_stack([Ht.rmatvec(Mn.G[:, k]) for k in range(Mn.d)])
        P = CauchyLikeOperand(s, q, np.column_stack([Mn.F, Mn.exact_matvec(ones)]),
                              np.column_stack([CtG, ones]))
    else:
        # D_q P' - P' D_t = (C_{q,s} F) G^T + 1 (M^T 1)^T, with C_{q,s} = -C_{s,q}^T
        CF = np.column_stack([-Hs.rmatvec(Mn.F[:, k]) for k in range(Mn.d)])
        P = CauchyLikeOperand(q, t, np.column_stack([CF, ones]),
                              np.column_stack([Mn.G, Mn.transpose().exact_matvec(ones)]))
    return {"variant": choice, "amplification": amp[choice], "estimates": amp, "P": P,
            "Ht": Ht, "Hs": Hs, "scale": a, "epsilon": eps}


def _reknot_matvec(M, u, eps, variant, limit):
    plan = reknot_plan(M, eps, variant, limit)
    a, P = plan["scale"], plan["P"]
    if plan["variant"] == "right":
        v = hss_solve(plan["Ht"], u, check_condition=False)
        y = cauchy_like_matvec(P, v, eps)
    else:
        w = cauchy_like_matvec(P, u, eps)
        # C_{q,s}^{-1} w = -(C_{s,q}^T)^{-1} w
        y = -hss_solve(plan["Hs"], w, transpose=True, check_condition=False)
    bound = M.shape[1] * eps * plan["amplification"] * float(np.abs(u).max()) / a
    return y / a, RouteReport("reknot-" + plan["variant"], bound, plan["amplification"],
                              details={"estimates": plan["estimates"]})


def cauchy_any_knots_matvec(M, u, epsilon, variant=None, amplification_limit=None, return_report=False):
    """``M u`` for a Cauchy-like operand with arbitrary knots.

    Routing: a grid on either side uses the CV form; knots on one line use
    an affine map to the real line; knots on one circle use three Mobius
    maps (one pole per arc pair); anything else is re-knotted onto a grid
    (square operands) or summed directly (rectangular ones).

    Returns
    -------
    y : ndarray
    report : RouteReport
        Only with ``return_report``; ``report.bound`` bounds
        ``||y - M u||_inf``.
    """
    if not isinstance(M, CauchyLikeOperand):
        raise ClassMismatchError("expected a CauchyLikeOperand")
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    u = as_vector(u, "u")
    if u.shape[0] != M.shape[1]:
        raise DimensionError(f"u has length {u.shape[0]}, expected {M.shape[1]}")
    if _grid_scale(M.t) is not None or _grid_scale(M.s) is not None:
        y, bound = cauchy_like_matvec(M, u, eps, return_bound=True)
        rep = RouteReport("cv", bound)
    else:
        curve = detect_curve(np.concatenate([M.s.values, M.t.values]))
        if curve is not None and curve.kind == "line":
            y, rep = _line_matvec(M, curve, u, eps)
        elif curve is not None:
            y, rep = _circle_matvec(M, curve, u, eps)
        elif M.shape[0] != M.shape[1]:
            y, rep = M.exact_matvec(u), RouteReport("direct")
        else:
            y, rep = _reknot_matvec(M, u, eps, variant, amplification_limit)
    return (y, rep) if return_report else y


def cauchy_any_knots_solve(M, b, epsilon, variant=None, amplification_limit=None, return_report=False):
    """Solve ``M x = b`` for a square Cauchy-like operand with arbitrary knots.

    A grid on either side solves the CV form directly.  Otherwise the
    operand is re-knotted: ``M^{-1} = C_{t,q} P^{-1}`` (right variant) or
    ``P'^{-1} C_{q,s}`` (left variant), with the amplification checked.
    """
    if not isinstance(M, CauchyLikeOperand):
        raise ClassMismatchError("expected a CauchyLikeOperand")
    eps = check_epsilon(epsilon)
    if eps is None:
        raise InvalidToleranceError("epsilon is required")
    b = as_vector(b, "b")
    if M.shape[0] != M.shape[1]:
        raise DimensionError("solve needs a square operand")
    if b.shape[0] != M.shape[0]:
        raise DimensionError(f"b has length {b.shape[0]}, expected {M.shape[0]}")
    if _grid_scale(M.t) is not None or _grid_scale(M.s) is not None:
        x = cauchy_like_solve(M, b, eps)
        rep = RouteReport("cv")
    else:
        plan = reknot_plan(M, eps, variant, amplification_limit)
        a, P = plan["scale"], plan["P"]
        if plan["variant"] == "right":
            # M = P C_{t,q}^{-1}  =>  x = C_{t,q} P^{-1} b
            x = plan["Ht"].matvec(cauchy_like_solve(P, b * a, eps))
        else:
            # M = C_{q,s}^{-1} P'  =>  x = P'^{-1} C_{q,s} b, C_{q,s} = -C_{s,q}^T
            x = cauchy_like_solve(P, -plan["Hs"].rmatvec(b * a), eps)
        rep = RouteReport("reknot-" + plan["variant"], amplification=plan["amplification"],
                          details={"estimates": plan["estimates"]})
    return (x, rep) if return_report else x


# rational functions ---------------------------------------------------------

def rational_eval(s, t, u, epsilon):
    """Values ``v_i = sum_j u_j / (s_i - t_j)``.

    Examples
    --------
    >>> rational_eval([0.0], [2.0], [1.0], 1e-8).real.tolist()
    [-0.5]
    """
    s, t = as_knots(s, "s"), as_knots(t, "t")
    u = as_vector(u, "u")
    if u.shape[0] != len(t):
        raise DimensionError(f"u has length {u.shape[0]}, expected {len(t)}")
    return cauchy_any_knots_matvec(CauchyLikeOperand.cauchy(s, t), u, epsilon)


def rational_interpolate(s, t, v, epsilon):
    """Weights ``u`` with ``sum_j u_j / (s_i - t_j) = v_i`` (square, well conditioned)."""
    s, t = as_knots(s, "s"), as_knots(t, "t")
    return cauchy_any_knots_solve(CauchyLikeOperand.cauchy(s, t), v, epsilon)

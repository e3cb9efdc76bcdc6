"""Generator-level maps between the Toeplitz, Hankel, Vandermonde and Cauchy classes.

Each map multiplies the represented matrix by structured multipliers and
returns a generator of the product, never forming dense intermediates.
Map names follow the usual lettering:

===== ============ =====================  ===========
name  classes      product                length
===== ============ =====================  ===========
a     T -> H       J M                    d
b     T -> V       V_s M                  d + 1
c     H -> T       M J  (or J M)          d
d     H -> V       c then b               d + 1
e     V -> H       V_s^T M                d + 1
f     V -> T       e then c               d + 1
g     V -> C       M J V_t^T or M V_t^-1  d + 1
h     C -> V       M V_t                  d + 1
i     C -> T       h then f               d + 2
j     C -> H       h then e               d + 2
k     T -> C       b then g               d + 2
i2    H -> C       d then g               d + 2
===== ============ =====================  ===========

plus ``tc-dft``, the DFT-based Toeplitz-to-Cauchy map
``C = Omega M D0^H Omega^H`` with ``D0 = diag(omega_{2n}**i)``.
"""

from typing import NamedTuple

import numpy as np

from ._validation import as_scalar, check_epsilon
from .core import dense_cauchy, root_of_unity, unity_powers
from .displacement import (DisplacementGenerator, OperatorDescriptor, generator_matvec,
                           generator_rmatvec, vandermonde_apply)
from .exceptions import (ClassMismatchError, InconsistentInputError, KnotCollisionError,
                         SingularOperatorError)
from .knots import KnotSet, as_knots

DROP_TOL = 1e-14


def _fro(X):
    return float(np.linalg.norm(X)) if X.size else 0.0


def _append(gen_like, A, B, F, G, fcol, gcol):
    """Append a rank-1 term unless it is numerically zero."""
    n = A.n
    fcol = np.asarray(fcol, dtype=np.complex128).reshape(n)
    gcol = np.asarray(gcol, dtype=np.complex128).reshape(n)
    term = _fro(fcol) * _fro(gcol)
    scale = max(_fro(F) * _fro(G), 1.0)
    if term <= DROP_TOL * scale:
        return DisplacementGenerator(A, B, F, G)
    return DisplacementGenerator(A, B, np.hstack([F, fcol[:, None]]), np.hstack([G, gcol[:, None]]))


def _unit(n, k):
    v = np.zeros(n, dtype=np.complex128)
    v[k] = 1
    return v


def _require(gen, patterns, what):
    if gen.pattern not in patterns:
        raise ClassMismatchError(f"{what} expects operator pattern {patterns}, got {gen.structure_tag}"
                                 f" ({gen.A!r}, {gen.B!r})")


def _default_grid(e, n, avoid=None):
    """Grid knots ``g omega_n**j`` with ``g**n = e`` (unit scale if ``e = 0``)."""
    g = e ** (1.0 / n) if e != 0 else 1.0 + 0j
    grid = KnotSet.grid(g, n)
    if avoid is not None and np.intersect1d(grid.values, avoid.values).size:
        grid = KnotSet.grid(g * root_of_unity(2 * n), n)
    return grid


def _pick_param(powers, avoid=()):
    """Unit-modulus scalar far from every value in ``powers`` and ``avoid``."""
    n = len(powers)
    cand = np.exp(2j * np.pi * (np.arange(4 * n) + 0.5) / (4 * n))
    pts = np.concatenate([np.asarray(powers), np.asarray(list(avoid), dtype=np.complex128)])
    gaps = np.abs(cand[:, None] - pts[None, :]).min(axis=1)
    return complex(cand[int(np.argmax(gaps))])


# elementary maps -----------------------------------------------------------

def toeplitz_hankel_swap(gen, side=None):
    """Reflect ``M`` to ``J M`` (``side='left'``) or ``M J`` (``'right'``).

    Left reflection maps ``A`` to ``J A J`` and ``F`` to ``J F``; right
    reflection maps ``B`` to ``J B J`` and ``G`` to ``J G``.  The length is
    unchanged.  By default a Toeplitz input is reflected on the left and a
    Hankel input on whichever side yields the ``(Z_e, Z_f)`` pair.
    """
    _require(gen, ("t", "t2", "h", "h2"), "toeplitz_hankel_swap")
    if side is None:
        side = {"t": "left", "t2": "left", "h": "right", "h2": "left"}[gen.pattern]
    if side == "left":
        return DisplacementGenerator(gen.A.transpose(), gen.B, gen.F[::-1], gen.G)
    if side == "right":
        return DisplacementGenerator(gen.A, gen.B.transpose(), gen.F, gen.G[::-1])
    raise InconsistentInputError("side must be 'left' or 'right'")


def toeplitz_to_vandermonde(gen, s=None, epsilon=None):
    """Map (b): generator of ``V_s M`` under ``(D_s, Z_f)``.

    ``F' = [V_s F | s**n - e]`` and ``G' = [G | M^T e_n]``; the extra column
    vanishes (and is dropped) when ``s_i**n = e``.
    """
    _require(gen, ("t",), "toeplitz_to_vandermonde")
    n = gen.n
    e, f = gen.A.param, gen.B.param
    s = _default_grid(e, n) if s is None else as_knots(s)
    if len(s) != n:
        raise InconsistentInputError("knot count differs from matrix size")
    sn = s.power()
    if np.abs(sn - f).min() <= 1e-14 * max(1.0, abs(f)):
        raise SingularOperatorError("some s_i**n equals f; the output operator is singular")
    VF = vandermonde_apply(s, gen.F, epsilon=epsilon).reshape(n, -1)
    A = OperatorDescriptor.diagonal(s)
    return _append(gen, A, gen.B, VF, gen.G, sn - e, generator_rmatvec(gen, _unit(n, n - 1), epsilon))


def vandermonde_to_hankel(gen, e=None, epsilon=None):
    """Map (e): generator of ``V_s^T M`` under ``(Z_e^T, Z_f)``.

    ``F' = [V_s^T F | e_n]`` and ``G' = [G | M^T (e - s**n)]``.
    """
    _require(gen, ("v",), "vandermonde_to_hankel")
    n = gen.n
    s, f = gen.A.knots, gen.B.param
    sn = s.power()
    if e is None:
        common = sn[0] if np.all(sn == sn[0]) else None
        e = common if common is not None and common != f else _pick_param(sn, avoid=(f,))
    e = as_scalar(e, "e")
    if e == f:
        raise SingularOperatorError("e must differ from f for the Hankel operator pair")
    VtF = vandermonde_apply(s, gen.F, transpose=True, epsilon=epsilon).reshape(n, -1)
    A = OperatorDescriptor.shift_t(e, n)
    return _append(gen, A, gen.B, VtF, gen.G, _unit(n, n - 1), generator_rmatvec(gen, e - sn, epsilon))


def _inv_vandermonde(t, X, transpose=False):
    """``V_t^{-1} X`` (or ``V_t^{-T} X``); FFT when ``t`` is a grid."""
    n = len(t)
    X = np.asarray(X, dtype=np.complex128)
    if t.is_grid:
        scale = t.grid_scale ** (-np.arange(n))
        if X.ndim == 2:
            scale = scale[:, None]
        if transpose:
            return np.fft.fft(scale * X, axis=0) / n
        return scale * (np.fft.fft(X, axis=0) / n)
    from .core import dense_solve
    V = np.vander(t.values, n, increasing=True)
    return dense_solve(V.T if transpose else V, X)


def vandermonde_to_cauchy(gen, t=None, variant="Vinv", epsilon=None):
    """Map (g): generator of a Cauchy-like product under ``(D_s, D_t)``.

    ``variant='JVt'`` gives ``M J V_t^T`` with ``F' = [F | M e_1]``,
    ``G' = [V_t J G | e - t**n]``.  ``variant='Vinv'`` gives ``M V_t^{-1}``
    with ``F' = [F | -M V_t^{-1}(t**n - e)]``, ``G' = [V_t^{-T} G | V_t^{-T} e_n]``.
    """
    _require(gen, ("v",), "vandermonde_to_cauchy")
    n = gen.n
    s, e = gen.A.knots, gen.B.param
    t = _default_grid(e, n, avoid=s) if t is None else as_knots(t)
    if len(t) != n:
        raise InconsistentInputError("knot count differs from matrix size")
    try:
        s.check_disjoint(t)
    except KnotCollisionError:
        raise
    tn = t.power()
    B = OperatorDescriptor.diagonal(t)
    if variant == "JVt":
        VJG = vandermonde_apply(t, gen.G[::-1], epsilon=epsilon).reshape(n, -1)
        return _append(gen, gen.A, B, gen.F, VJG, generator_matvec(gen, _unit(n, 0), epsilon), e - tn)
    if variant == "Vinv":
        Gp = _inv_vandermonde(t, gen.G, transpose=True).reshape(n, -1)
        w = _inv_vandermonde(t, tn - e)
        fcol = -generator_matvec(gen, w, epsilon)
        return _append(gen, gen.A, B, gen.F, Gp, fcol, _inv_vandermonde(t, _unit(n, n - 1), transpose=True))
    raise InconsistentInputError("variant must be 'JVt' or 'Vinv'")


def cauchy_to_vandermonde(gen, e=None, epsilon=None):
    """Map (h): generator of ``M V_t`` under ``(D_s, Z_e)``.

    ``F' = [F | M (t**n - e)]`` and ``G' = [V_t^T G | e_n]``.
    """
    _require(gen, ("c",), "cauchy_to_vandermonde")
    n = gen.n
    s, t = gen.A.knots, gen.B.knots
    sn, tn = s.power(), t.power()
    if e is None:
        common = tn[0] if np.all(tn == tn[0]) else None
        if common is not None and np.abs(sn - common).min() > 1e-8 * max(1.0, abs(common)):
            e = common
        else:
            e = _pick_param(sn)
    e = as_scalar(e, "e")
    if np.abs(sn - e).min() <= 1e-14 * max(1.0, abs(e)):
        raise SingularOperatorError("some s_i**n equals e; the output operator is singular")
    VtG = vandermonde_apply(t, gen.G, transpose=True, epsilon=epsilon).reshape(n, -1)
    B = OperatorDescriptor.shift(e, n)
    return _append(gen, gen.A, B, gen.F, VtG, generator_matvec(gen, tn - e, epsilon), _unit(n, n - 1))


def toeplitz_to_cauchy_dft(gen):
    """DFT-based map of ``(Z_1, Z_-1)`` Toeplitz-like ``M`` to ``C = Omega M D0^H Omega^H``.

    ``C`` satisfies ``D C - C (omega_{2n} D) = F_C G_C^T`` with
    ``D = diag(omega_n**i)``, ``F_C = Omega F`` and
    ``G_C = conj(Omega) conj(D0) G``; both knot sets lie on the
    ``2n``-th roots of unity.  The length is unchanged.
    """
    _require(gen, ("t",), "toeplitz_to_cauchy_dft")
    if gen.A.param != 1 or gen.B.param != -1:
        raise ClassMismatchError("toeplitz_to_cauchy_dft needs the (Z_1, Z_-1) pair; "
                                 "use operator_shift_adjust first")
    n = gen.n
    d0 = unity_powers(2 * n)[:n]
    FC = np.fft.ifft(gen.F, axis=0) * n
    GC = np.fft.fft(np.conj(d0)[:, None] * gen.G, axis=0)
    s = KnotSet.grid(1.0, n)
    t = KnotSet.grid(root_of_unity(2 * n), n)
    return DisplacementGenerator(OperatorDescriptor.diagonal(s), OperatorDescriptor.diagonal(t), FC, GC)


def cauchy_to_toeplitz_dft_solution(y):
    """Undo the column multiplier of :func:`toeplitz_to_cauchy_dft`.

    If ``C y = Omega b`` then ``x = D0^H Omega^H y`` solves ``M x = b``.
    """
    y = np.asarray(y, dtype=np.complex128)
    n = y.shape[0]
    d0 = unity_powers(2 * n)[:n]
    return np.conj(d0) * np.fft.fft(y)


def cauchy_reknot(gen, e=1.0, epsilon=None):
    """Generator of ``M C_{t,q}`` under ``(A, D_q)`` with ``q = e omega_n**j``.

    Here ``gen`` is under ``(A, D_t)``; ``F' = [F | M 1]`` and
    ``G' = [C_{t,q}^T G | 1]``.  This turns a Cauchy-like matrix with
    arbitrary column knots into a CV-like one.
    """
    if gen.B.kind != "diag":
        raise ClassMismatchError("cauchy_reknot needs a diagonal right operator")
    n = gen.n
    t = gen.B.knots
    q = e if isinstance(e, KnotSet) else KnotSet.grid(as_scalar(e, "e", nonzero=True), n)
    t.check_disjoint(q, "t and the new grid")
    ones = np.ones(n, dtype=np.complex128)
    CtG = _cauchy_transpose_apply(t, q, gen.G, epsilon)
    B = OperatorDescriptor.diagonal(q)
    return _append(gen, gen.A, B, gen.F, CtG, generator_matvec(gen, ones, epsilon), ones)


def _cauchy_transpose_apply(t, q, X, epsilon=None):
    """``C_{t,q}^T X`` in row chunks (exact)."""
    X = np.asarray(X, dtype=np.complex128)
    out = np.zeros((len(q), X.shape[1]), dtype=np.complex128)
    for lo in range(0, len(t), 512):
        out += dense_cauchy(t.values[lo:lo + 512], q.values).T @ X[lo:lo + 512]
    return out


# composition --------------------------------------------------------------

_ELEMENTARY = {
    "a": (toeplitz_hankel_swap, 0),
    "b": (toeplitz_to_vandermonde, 1),
    "c": (toeplitz_hankel_swap, 0),
    "e": (vandermonde_to_hankel, 1),
    "g": (vandermonde_to_cauchy, 1),
    "h": (cauchy_to_vandermonde, 1),
    "tc-dft": (toeplitz_to_cauchy_dft, 0),
}

COMPOSITES = {
    "d": ("c", "b"),
    "f": ("e", "c"),
    "i": ("h", "e", "c"),
    "j": ("h", "e"),
    "k": ("b", "g"),
    "i2": ("c", "b", "g"),
}

MAP_BUDGET = {"a": 0, "c": 0, "b": 1, "d": 1, "e": 1, "f": 1, "g": 1, "h": 1,
              "i": 2, "j": 2, "k": 2, "i2": 2, "tc-dft": 0}

_INPUT = {"a": ("t", "t2"), "c": ("h", "h2")}


class TransformRecord(NamedTuple):
    generator: DisplacementGenerator
    steps: tuple
    length_bound: int


def apply_map(gen, name, **kwargs):
    """Apply one named map (elementary or composite)."""
    if name in COMPOSITES:
        for sub in COMPOSITES[name]:
            gen = apply_map(gen, sub, **kwargs.get(sub, {}))
        return gen
    if name not in _ELEMENTARY:
        raise InconsistentInputError(f"unknown map {name!r}")
    if name in _INPUT:
        _require(gen, _INPUT[name], f"map ({name})")
    fn, _ = _ELEMENTARY[name]
    return fn(gen, **kwargs)


def chain_length_bound(steps, d):
    """Length budget after applying ``steps`` to a length-``d`` generator."""
    return d + sum(MAP_BUDGET[_step_name(s)] for s in steps)


def _step_name(step):
    return step if isinstance(step, str) else step[0]


def compose_transform(gen, steps=(), return_record=False):
    """Apply ``steps`` left to right.

    Parameters
    ----------
    steps : sequence
        Map names, or ``(name, kwargs)`` pairs for maps that take knots or
        scalars.
    return_record : bool
        Also return the cumulative length bound.
    """
    start = gen.length
    for step in steps:
        name = _step_name(step)
        kwargs = {} if isinstance(step, str) else dict(step[1])
        gen = apply_map(gen, name, **kwargs)
    if return_record:
        return TransformRecord(gen, tuple(steps), chain_length_bound(steps, start))
    return gen

import numpy as np
import pytest
from hypothesis import given, strategies as st

from structmat import textio
from structmat.core import dense_cauchy, dense_toeplitz, dense_vandermonde
from structmat.displacement import (DisplacementGenerator, OperatorDescriptor as Op, cauchy_generator,
                                    displacement_dense, generator_compress, generator_from_dense,
                                    generator_inverse, generator_matvec, generator_permute_rows,
                                    generator_product, generator_rmatvec, generator_transpose,
                                    identity_generator, operator_shift_adjust, recover_dense,
                                    toeplitz_generator, vandermonde_generator)
from structmat.exceptions import (ClassMismatchError, DimensionError, KnotCollisionError,
                                  SingularOperatorError)
from structmat.knots import KnotSet, NearCoincidenceWarning

from helpers import crandn


def _pairs(n, rng):
    s = KnotSet(rng.uniform(0.8, 1.2, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n)))
    t = KnotSet(crandn(rng, n) + 4)
    return {
        "t": (Op.shift(1, n), Op.shift(-1, n)),
        "t2": (Op.shift_t(2, n), Op.shift_t(0.5j, n)),
        "h": (Op.shift(1, n), Op.shift_t(-1, n)),
        "h2": (Op.shift_t(1j, n), Op.shift(-1j, n)),
        "v": (Op.diagonal(s), Op.shift(0, n)),
        "vt": (Op.shift_t(0, n), Op.diagonal(s)),
        "c": (Op.diagonal(s), Op.diagonal(t)),
    }


# knots -------------------------------------------------------------------

def test_knotset_rejects_duplicates():
    with pytest.raises(KnotCollisionError):
        KnotSet([1, 2, 1])


def test_knotset_flags_near_coincidence():
    with pytest.warns(NearCoincidenceWarning):
        ks = KnotSet([1.0, 1.0 + 1e-16 * 1j + 1e-15])
    assert ks.near_coincident


def test_knotset_metadata():
    ks = KnotSet([1j, -2.0])
    assert np.allclose(ks.angles, [np.pi / 2, np.pi])
    assert ks.max_magnitude == 2.0
    g = KnotSet.grid(2.0, 4)
    assert g.is_grid and np.allclose(g.power(), 16)


def test_disjoint_check():
    with pytest.raises(KnotCollisionError):
        KnotSet([1, 2]).check_disjoint([2, 3])


# displacement_dense / generator_from_dense -------------------------------

def test_cauchy_displacement_is_ones(rng):
    s, t = crandn(rng, 6), crandn(rng, 6) + 5
    R = displacement_dense(dense_cauchy(s, t), Op.diagonal(s), Op.diagonal(t))
    assert np.allclose(R, np.ones((6, 6)))
    gen = generator_from_dense(dense_cauchy(s, t), Op.diagonal(s), Op.diagonal(t))
    assert gen.length == 1
    assert np.allclose(gen.F @ gen.G.T, 1)


def test_identity_displacements():
    n = 5
    I = np.eye(n)
    assert np.allclose(displacement_dense(I, Op.shift(1, n), Op.shift(1, n)), 0)
    R = displacement_dense(I, Op.shift(1, n), Op.shift(-1, n))
    expect = np.zeros((n, n))
    expect[0, n - 1] = 2
    assert np.allclose(R, expect)
    assert generator_from_dense(I, Op.shift(1, n), Op.shift(-1, n)).length == 1


def test_zero_matrix_generator():
    gen = generator_from_dense(np.zeros((4, 4)), Op.shift(1, 4), Op.shift(-1, 4))
    assert gen.length == 0 and gen.F.shape == (4, 0)


def test_displacement_dimension_mismatch():
    with pytest.raises(DimensionError):
        displacement_dense(np.eye(3), Op.shift(1, 4), Op.shift(-1, 4))


# recovery ---------------------------------------------------------------

def test_recover_cauchy_unit(rng):
    s, t = crandn(rng, 7), crandn(rng, 7) + 4
    assert np.allclose(recover_dense(cauchy_generator(s, t)), dense_cauchy(s, t))


def test_recover_identity_generator():
    gen = identity_generator(1, -1, 6)
    assert np.allclose(recover_dense(gen), np.eye(6))
    assert np.allclose(generator_matvec(gen, np.arange(6.0)), np.arange(6.0))


@pytest.mark.parametrize("pattern", ["t", "t2", "h", "h2", "v", "vt", "c"])
@pytest.mark.parametrize("n", [1, 2, 9, 33])
def test_roundtrip_every_pattern(rng, pattern, n):
    A, B = _pairs(n, rng)[pattern]
    M = crandn(rng, n, n)
    gen = generator_from_dense(M, A, B, tol=0)
    assert gen.pattern == pattern
    assert np.abs(recover_dense(gen) - M).max() <= 1e-10 * np.abs(M).max() * max(1, n / 8)


@pytest.mark.parametrize("pattern", ["t", "t2", "h", "h2", "v", "vt", "c"])
def test_generator_matvec_matches_recovery(rng, pattern):
    n = 24
    A, B = _pairs(n, rng)[pattern]
    gen = DisplacementGenerator(A, B, crandn(rng, n, 2), crandn(rng, n, 2))
    u = crandn(rng, n)
    ref = recover_dense(gen) @ u
    assert np.abs(generator_matvec(gen, u) - ref).max() <= 1e-10 * np.abs(ref).max()
    reft = recover_dense(gen).T @ u
    assert np.abs(generator_rmatvec(gen, u) - reft).max() <= 1e-10 * np.abs(reft).max()


def test_generator_matvec_zero(rng):
    gen = cauchy_generator(crandn(rng, 5), crandn(rng, 5) + 4)
    assert np.allclose(generator_matvec(gen, np.zeros(5)), 0)


def test_generator_matvec_cv_approximate(rng):
    n = 128
    s = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n) * (1 + 0.1 * rng.uniform(-1, 1, n) / n)
    gen = DisplacementGenerator(Op.diagonal(s), Op.diagonal(KnotSet.grid(1.0, n)),
                                crandn(rng, n, 2), crandn(rng, n, 2))
    u = crandn(rng, n)
    y = generator_matvec(gen, u, epsilon=1e-12)
    assert np.abs(y - recover_dense(gen) @ u).max() <= 1e-9 * np.linalg.norm(u)


def test_singular_operator_rejected():
    n = 4
    gen = DisplacementGenerator(Op.shift(1, n), Op.shift(1, n), np.ones((n, 1)), np.ones((n, 1)))
    with pytest.raises(SingularOperatorError):
        recover_dense(gen)
    grid = KnotSet.grid(1.0, n)
    gen = DisplacementGenerator(Op.diagonal(grid), Op.shift(1, n), np.ones((n, 1)), np.ones((n, 1)))
    with pytest.raises(SingularOperatorError):
        recover_dense(gen)


@pytest.mark.parametrize("n", [8, 64])
def test_basic_displacement_ranks(rng, n):
    c, r = crandn(rng, n), crandn(rng, n)
    r[0] = c[0]
    T = dense_toeplitz(c, r)
    assert generator_from_dense(T, Op.shift(1, n), Op.shift(-1, n)).length <= 2
    assert generator_from_dense(T[::-1], Op.shift(1, n), Op.shift_t(-1, n)).length <= 2
    s = np.exp(2j * np.pi * rng.uniform(0, 1, n)) * rng.uniform(0.9, 1.1, n)
    assert generator_from_dense(dense_vandermonde(s), Op.diagonal(s), Op.shift(0, n)).length <= 1
    t = crandn(rng, n) + 10
    assert generator_from_dense(dense_cauchy(s, t), Op.diagonal(s), Op.diagonal(t)).length == 1


def test_named_constructors(rng):
    n = 10
    c, r = crandn(rng, n), crandn(rng, n)
    r[0] = c[0]
    gen = toeplitz_generator(c, r, 1, -1)
    assert gen.length == 2 and np.allclose(recover_dense(gen), dense_toeplitz(c, r))
    s = crandn(rng, n)
    assert np.allclose(recover_dense(vandermonde_generator(s, 0)), dense_vandermonde(s))


# algebra ----------------------------------------------------------------

def test_transpose(rng):
    n = 32
    s, t = crandn(rng, n), crandn(rng, n) + 4
    gen = cauchy_generator(s, t)
    gt = generator_transpose(gen)
    assert gt.length == gen.length
    assert np.abs(recover_dense(gt) - dense_cauchy(s, t).T).max() <= 1e-12 * np.abs(dense_cauchy(s, t)).max()
    assert np.allclose(recover_dense(gt), -dense_cauchy(t, s))
    assert np.allclose(recover_dense(generator_transpose(gt)), recover_dense(gen))


def test_transpose_random(rng):
    n = 32
    for A, B in _pairs(n, rng).values():
        gen = DisplacementGenerator(A, B, crandn(rng, n, 2), crandn(rng, n, 2))
        M = recover_dense(gen)
        err = np.abs(recover_dense(generator_transpose(gen)) - M.T).max()
        assert err <= 1e-12 * np.abs(M).max() * n


def test_product(rng):
    n = 32
    A, B, C = Op.shift(1, n), Op.shift(-1, n), Op.shift(2, n)
    gm = DisplacementGenerator(A, B, crandn(rng, n, 2), crandn(rng, n, 2))
    gn = DisplacementGenerator(B, C, crandn(rng, n, 1), crandn(rng, n, 1))
    gp = generator_product(gm, gn)
    assert gp.length == 3
    ref = recover_dense(gm) @ recover_dense(gn)
    assert np.abs(recover_dense(gp) - ref).max() <= 1e-9 * np.abs(ref).max()


def test_product_with_trivial_identity(rng):
    n = 16
    A, B = Op.shift(1, n), Op.shift(-1, n)
    gm = DisplacementGenerator(A, B, crandn(rng, n, 2), crandn(rng, n, 2))
    gi = DisplacementGenerator(B, B, np.zeros((n, 0)), np.zeros((n, 0)))
    # (B, B) is singular, so the product only uses the zero-length factors
    gp = generator_product(gm, DisplacementGenerator(B, Op.shift(3, n), *_identity_factors(n, -1, 3)))
    assert np.allclose(recover_dense(gp), recover_dense(gm))
    assert gi.length == 0


def _identity_factors(n, e, f):
    g = identity_generator(e, f, n)
    return g.F, g.G


def test_product_mismatch(rng):
    n = 4
    g1 = identity_generator(1, -1, n)
    with pytest.raises(ClassMismatchError):
        generator_product(g1, g1)


def test_inverse(rng):
    n = 32
    c, r = rng.standard_normal(n) / n + 0j, rng.standard_normal(n) / n + 0j
    c[0] = r[0] = 3
    gen = toeplitz_generator(c, r)
    gi = generator_inverse(gen)
    assert gi.length == gen.length
    assert gi.A == gen.B and gi.B == gen.A
    assert np.allclose(recover_dense(gi) @ dense_toeplitz(c, r), np.eye(n), atol=1e-10)
    assert np.abs(recover_dense(generator_inverse(gi)) - dense_toeplitz(c, r)).max() <= 1e-8


def test_inverse_identity_and_cauchy(rng):
    assert np.allclose(recover_dense(generator_inverse(identity_generator(1, -1, 5))), np.eye(5))
    n = 16
    s = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    t = np.exp(2j * np.pi * np.arange(n) / n)
    gi = generator_inverse(cauchy_generator(s, t))
    assert np.allclose(dense_cauchy(s, t) @ recover_dense(gi), np.eye(n), atol=1e-8)


def test_shift_adjust(rng):
    n = 12
    c, r = crandn(rng, n), crandn(rng, n)
    r[0] = c[0]
    gen = toeplitz_generator(c, r, 1, -1)
    assert operator_shift_adjust(gen, -1) is gen
    adj = operator_shift_adjust(gen, 2.0)
    assert adj.length <= gen.length + 1 and adj.B.param == 2.0
    assert np.abs(recover_dense(adj) - dense_toeplitz(c, r)).max() <= 1e-10 * np.abs(c).max() * n
    left = operator_shift_adjust(gen, 3j, side="left")
    assert np.abs(recover_dense(left) - dense_toeplitz(c, r)).max() <= 1e-10 * np.abs(c).max() * n


def test_shift_adjust_from_singular_pair():
    n = 6
    zero = DisplacementGenerator(Op.shift(1, n), Op.shift(1, n), np.zeros((n, 0)), np.zeros((n, 0)))
    adj = operator_shift_adjust(zero, -1, M=np.eye(n))
    assert adj.length == 1
    assert np.allclose(adj.F[:, 0], 2 * np.eye(n)[0]) and np.allclose(adj.G[:, 0], np.eye(n)[-1])
    assert np.allclose(recover_dense(adj), np.eye(n))


def test_shift_adjust_non_shift(rng):
    with pytest.raises(ClassMismatchError):
        operator_shift_adjust(cauchy_generator([1, 2], [3, 4]), 1.0)


def test_row_permutation_closure(rng):
    n = 20
    s = rng.uniform(0.8, 1.2, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    t = crandn(rng, n) + 5
    gen = DisplacementGenerator(Op.diagonal(s), Op.diagonal(t), crandn(rng, n, 2), crandn(rng, n, 2))
    perm = rng.permutation(n)
    assert np.allclose(recover_dense(generator_permute_rows(gen, perm)), recover_dense(gen)[perm])
    gv = vandermonde_generator(s, 0)
    assert np.allclose(recover_dense(generator_permute_rows(gv, perm)), dense_vandermonde(s)[perm])


def test_compress(rng):
    n = 16
    A, B = Op.shift(1, n), Op.shift(-1, n)
    F = crandn(rng, n, 2)
    gen = DisplacementGenerator(A, B, np.hstack([F, F]), np.hstack([crandn(rng, n, 2)] * 2))
    small = generator_compress(gen)
    assert small.length == 2
    assert np.allclose(recover_dense(small), recover_dense(gen))


@given(st.integers(1, 12), st.integers(0, 3), st.sampled_from(["t", "h", "v", "vt", "c"]),
       st.integers(0, 2**31))
def test_serialization_roundtrip(n, d, pattern, seed):
    rng = np.random.default_rng(seed)
    A, B = _pairs(n, rng)[pattern]
    gen = DisplacementGenerator(A, B, crandn(rng, n, d), crandn(rng, n, d))
    back = textio.read_generator(textio.format_generator(gen))
    assert back.A == gen.A and back.B == gen.B
    assert np.array_equal(back.F, gen.F) and np.array_equal(back.G, gen.G)


def test_serialization_header(rng):
    gen = toeplitz_generator([2, 1, 0], [2, 0, 1], 1, -1)
    head = textio.format_generator(gen).splitlines()[0].split()
    assert head[:2] == ["3", "2"] and head[2] == "shift" and head[5] == "shift"

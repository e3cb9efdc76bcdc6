import numpy as np


def crandn(rng, *shape):
    """Complex standard normal array."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b))


def map_multiplied(name, gen_in, gen_out, M, variant="Vinv"):
    """Dense matrix that an elementary structure map should produce from ``M``."""
    from structmat.core import dense_vandermonde, reversal, unity_powers

    n = M.shape[0]
    J = reversal(n)
    if name in ("a", "c"):
        return J @ M if gen_in.A.kind != gen_out.A.kind else M @ J
    if name == "b":
        return dense_vandermonde(gen_out.A.knots.values) @ M
    if name == "e":
        return dense_vandermonde(gen_in.A.knots.values).T @ M
    if name == "g":
        V = dense_vandermonde(gen_out.B.knots.values)
        return M @ J @ V.T if variant == "JVt" else M @ np.linalg.inv(V)
    if name == "h":
        return M @ dense_vandermonde(gen_in.B.knots.values)
    if name == "tc-dft":
        idx = np.arange(n)
        Om = np.exp(2j * np.pi * np.outer(idx, idx) / n)
        d0 = unity_powers(2 * n)[:n]
        return Om @ M @ np.diag(np.conj(d0)) @ Om.conj().T
    raise KeyError(name)


def ring(rng, n, lo=0.8, hi=1.2):
    """Random knots in the annulus ``lo <= |z| <= hi``."""
    return rng.uniform(lo, hi, n) * np.exp(2j * np.pi * rng.uniform(0, 1, n))


def random_toeplitz_gen(rng, n, d=2, e=1, f=-1):
    from structmat.displacement import DisplacementGenerator, OperatorDescriptor as Op

    return DisplacementGenerator(Op.shift(e, n), Op.shift(f, n), crandn(rng, n, d), crandn(rng, n, d))


def start_generator(kind, rng, n, d=2):
    """Random length-``d`` generator of class ``t``, ``h``, ``v`` or ``c``."""
    from structmat.displacement import DisplacementGenerator, OperatorDescriptor as Op
    from structmat.transforms import toeplitz_hankel_swap

    if kind == "t":
        return random_toeplitz_gen(rng, n, d)
    if kind == "h":
        return toeplitz_hankel_swap(random_toeplitz_gen(rng, n, d))
    if kind == "v":
        return DisplacementGenerator(Op.diagonal(ring(rng, n)), Op.shift(1j, n), crandn(rng, n, d),
                                     crandn(rng, n, d))
    return DisplacementGenerator(Op.diagonal(ring(rng, n)), Op.diagonal(ring(rng, n, 1.5, 2.0)),
                                 crandn(rng, n, d), crandn(rng, n, d))


# input class each structure map expects
MAP_INPUT = {"a": "t", "b": "t", "c": "h", "d": "h", "e": "v", "f": "v", "g": "v", "h": "c",
             "i": "c", "j": "c", "k": "t", "i2": "h", "tc-dft": "t"}

"""Command-line front end.

Every verb prints a JSON report on stdout (keys sorted, so a fixed seed
gives an identical payload apart from ``wall_time``) and writes any vector
or generator result to ``--out``.  Diagnostics go to stderr.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.  On
exit 2 the first stderr line is ``error: <class>: <message>`` where
``<class>`` is a token such as ``ill-conditioned``, ``singular`` or
``knot-collision``.

``bench`` writes CSV with the frozen columns :data:`BENCH_COLUMNS`.
"""

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import textio
from .core import (dense_cauchy, dense_solve, dense_toeplitz, dense_vandermonde, root_of_unity,
                   toeplitz_matvec)
from .displacement import (cauchy_generator, dense_generator_solver, generator_matvec, recover_dense,
                           toeplitz_generator, vandermonde_generator)
from .exceptions import InputError, NumericalError, StructMatError
from .hss import build_cv_hss
from .knots import KnotSet
from .sampling import dominant_toeplitz, sample_knots, sample_vector
from .solvers import (CauchyLikeOperand, Polynomial, cached_cv_hss, cauchy_any_knots_solve, cv_matvec,
                      cv_solve, log_kernel_eval_from_roots, poly_interpolate, poly_multipoint_eval,
                      toeplitz_like_solve, toeplitz_solve, vandermonde_matvec, vandermonde_solve,
                      vandermonde_transposed_matvec, vandermonde_transposed_solve)
from .transforms import MAP_BUDGET, compose_transform, toeplitz_hankel_swap

BENCH_COLUMNS = ("op", "n", "epsilon", "trials", "median_seconds", "max_rank")
BENCH_OPS = ("cvmatvec", "dense", "cvsolve", "tsolve")
GEN_CLASSES = ("toeplitz", "hankel", "vandermonde", "cauchy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# inputs ----------------------------------------------------------------

def _rng(args, stream):
    # independent streams per purpose so adding a draw never shifts another
    return np.random.default_rng([args.seed, stream])


def _read(path, reader=textio.read_vector):
    with open(path) as fh:
        return reader(fh)


def _knots(args, n=None, stream=1):
    n = args.n if n is None else n
    spec = args.knots
    if spec.startswith("file:"):
        return _read(spec[5:])
    return sample_knots(spec, n, _rng(args, stream))


def _vector(args, n, path=None, stream=2):
    path = args.input if path is None else path
    if path is not None:
        v = textio.read_vector(sys.stdin) if path == "-" else _read(path)
        if v.shape[0] != n:
            raise InputError(f"input vector has length {v.shape[0]}, expected {n}")
        return v
    return sample_vector(n, _rng(args, stream))


def _generator(args):
    if getattr(args, "gen", None):
        return _read(args.gen, textio.read_generator)
    n = args.n
    cls = args.cls
    if cls in ("toeplitz", "hankel"):
        col, row = dominant_toeplitz(n, _rng(args, 3))
        gen = toeplitz_generator(col, row, 1, -1)
        return gen if cls == "toeplitz" else toeplitz_hankel_swap(gen)
    s = _knots(args)
    if cls == "vandermonde":
        return vandermonde_generator(s, 0)
    return cauchy_generator(s, KnotSet.grid(1.0, n))


def _emit_vector(args, v):
    if args.out:
        textio.write_vector(v, args.out)


def _rel(a, b):
    den = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / den) if den else float(np.linalg.norm(a - b))


def _ranks(H):
    return [{"level": int(r["level"]), "blocks": int(r["blocks"]), "max_rank": int(r["max_rank"]),
             "max_bound": float(r["max_bound"])} for r in H.level_summary()]


def _hss_fields(H):
    return {"ranks": _ranks(H), "max_rank": int(H.rho), "max_bound": float(H.max_bound)}


# verbs -----------------------------------------------------------------

def cmd_gen(args):
    gen = _generator(args)
    text = textio.format_generator(gen)
    if args.out:
        textio.write_generator(gen, args.out)
    else:
        sys.stdout.write(text)
        return None
    return {"n": gen.n, "length": gen.length, "class": gen.structure_tag}


def cmd_matvec(args):
    gen = _generator(args)
    u = _vector(args, gen.n)
    y = generator_matvec(gen, u, args.eps)
    _emit_vector(args, y)
    rep = {"n": gen.n, "length": gen.length, "class": gen.structure_tag}
    if args.oracle:
        rep["error"] = float(np.abs(y - recover_dense(gen) @ u).max())
    return rep


def cmd_solve(args):
    gen = _generator(args)
    b = _vector(args, gen.n)
    if gen.pattern == "t":
        x = toeplitz_like_solve(gen, b, args.eps)
        route = "toeplitz"
    elif gen.pattern in ("h", "h2"):
        # J M or M J is Toeplitz
        side = "right" if gen.pattern == "h" else "left"
        tg = toeplitz_hankel_swap(gen, side)
        x = toeplitz_like_solve(tg, b[::-1] if side == "left" else b, args.eps)
        x = x if side == "left" else x[::-1]
        route = "hankel-toeplitz"
    elif gen.pattern == "c" and gen.F.shape[1] >= 1:
        M = CauchyLikeOperand(gen.A.knots, gen.B.knots, gen.F, gen.G)
        x, rep = cauchy_any_knots_solve(M, b, args.eps, return_report=True)
        route = f"cauchy-{rep.route}"
    else:
        x = dense_generator_solver(gen, b)
        route = "dense"
    _emit_vector(args, x)
    out = {"n": gen.n, "length": gen.length, "class": gen.structure_tag, "route": route,
           "residual": _rel(generator_matvec(gen, x), b)}
    if args.oracle:
        out["error"] = _rel(x, dense_solve(recover_dense(gen), b))
    return out


def cmd_transform(args):
    gen = _generator(args)
    steps = args.map or []
    rec = compose_transform(gen, steps, return_record=True)
    if args.out:
        textio.write_generator(rec.generator, args.out)
    return {"n": gen.n, "input_length": gen.length, "output_length": rec.generator.length,
            "length_bound": rec.length_bound, "maps": list(steps),
            "class": rec.generator.structure_tag}


def cmd_hss_report(args):
    n = args.n
    if args.fcf:
        s, e = KnotSet.grid(1.0, n), root_of_unity(2 * n)
    else:
        s, e = KnotSet(_knots(args)), args.e
    H = build_cv_hss(s, e, args.eps)
    text = H.dump() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    rep = {"n": n, "levels": len(H.levels), "blocks": len(H.blocks), "dense_blocks": len(H.dense_blocks)}
    rep.update(_hss_fields(H))
    if args.oracle:
        u = _vector(args, n)
        y = H.matvec(u)
        rep["error"] = float(np.abs(y - dense_cauchy(s.values, e * KnotSet.grid(1.0, n).values) @ u).max())
        rep["error_limit"] = float(n * args.eps * np.abs(u).max())
    return rep


def _bench_once(op, n, eps, trials, rng):
    s = sample_knots("circle", n, rng)
    u = sample_vector(n, rng)
    rank = ""
    if op == "cvmatvec":
        H = cached_cv_hss(s, 1.0, eps)
        rank = H.rho
        fn = lambda: cv_matvec(s, 1.0, u, eps)
    elif op == "cvsolve":
        H = cached_cv_hss(s, 1.0, eps)
        rank = H.rho
        fn = lambda: cv_solve(s, 1.0, u, eps)
    elif op == "dense":
        M = CauchyLikeOperand.cauchy(s, KnotSet.grid(1.0, n))
        fn = lambda: M.exact_matvec(u)
    else:
        col, row = dominant_toeplitz(n, rng)
        fn = lambda: toeplitz_solve(col, row, u, eps)
    fn()
    times = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), rank


def bench(sizes, epsilon, trials, op="cvmatvec", seed=0):
    """Median wall time per size; rows follow :data:`BENCH_COLUMNS`."""
    sizes = sorted(int(x) for x in sizes)
    if any(x < 1 or x & (x - 1) for x in sizes):
        raise InputError("sizes must be powers of two")
    rows = []
    for n in sizes:
        med, rank = _bench_once(op, n, epsilon, trials, np.random.default_rng([seed, n]))
        rows.append({"op": op, "n": n, "epsilon": epsilon, "trials": trials,
                     "median_seconds": med, "max_rank": rank})
    return rows


def cmd_bench(args):
    sizes = [int(x) for x in args.sizes.split(",")] if args.sizes else [args.n]
    rows = bench(sizes, args.eps, args.trials, args.op, args.seed)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return None


def cmd_eval(args):
    s = _knots(args)
    coef = _vector(args, args.degree + 1 if args.degree is not None else len(s))
    p = Polynomial(coef)
    y = poly_multipoint_eval(p, s, args.eps)
    _emit_vector(args, y)
    rep = {"n": len(s), "degree": p.degree}
    if args.oracle:
        ref = p(s)
        rep["error"] = _rel(y, ref)
    return rep


def cmd_interp(args):
    s = _knots(args)
    v = _vector(args, len(s))
    p = poly_interpolate(s, v, args.eps)
    _emit_vector(args, p.coef)
    rep = {"n": len(s), "residual": _rel(p(s), v)}
    if args.oracle:
        rep["error"] = _rel(p.coef, dense_solve(dense_vandermonde(s), v))
    return rep


def cmd_vmatvec(args):
    s = _knots(args)
    u = _vector(args, len(s))
    fn = vandermonde_transposed_matvec if args.transpose else vandermonde_matvec
    y = fn(s, u, args.eps)
    _emit_vector(args, y)
    rep = {"n": len(s), "transpose": bool(args.transpose)}
    if args.oracle:
        V = dense_vandermonde(s)
        rep["error"] = _rel(y, (V.T if args.transpose else V) @ u)
    return rep


def cmd_vsolve(args):
    s = _knots(args)
    b = _vector(args, len(s))
    fn = vandermonde_transposed_solve if args.transpose else vandermonde_solve
    x = fn(s, b, args.eps)
    _emit_vector(args, x)
    V = dense_vandermonde(s)
    V = V.T if args.transpose else V
    rep = {"n": len(s), "transpose": bool(args.transpose), "residual": _rel(V @ x, b)}
    if args.oracle:
        rep["error"] = _rel(x, dense_solve(V, b))
    return rep


def cmd_cvmatvec(args):
    s = _knots(args)
    n = len(s)
    u = _vector(args, n)
    y = cv_matvec(s, args.e, u, args.eps)
    _emit_vector(args, y)
    rep = {"n": n}
    rep.update(_hss_fields(cached_cv_hss(s, args.e, args.eps)))
    if args.oracle:
        C = dense_cauchy(np.asarray(s), KnotSet.grid(args.e, n).values)
        rep["error"] = float(np.abs(y - C @ u).max())
        rep["error_limit"] = float(n * args.eps * np.abs(u).max())
    return rep


def cmd_cvsolve(args):
    s = _knots(args)
    n = len(s)
    C = dense_cauchy(np.asarray(s), KnotSet.grid(args.e, n).values)
    b = _vector(args, n)
    x = cv_solve(s, args.e, b, args.eps)
    _emit_vector(args, x)
    rep = {"n": n, "residual": _rel(C @ x, b)}
    if args.oracle:
        rep["error"] = _rel(x, dense_solve(C, b))
    return rep


def cmd_tsolve(args):
    n = args.n
    if args.col:
        col = _read(args.col)
        row = _read(args.row) if args.row else col.copy()
        n = col.shape[0]
    else:
        col, row = dominant_toeplitz(n, _rng(args, 3))
    planted = None
    if args.input is not None:
        b = _vector(args, n)
    else:
        planted = sample_vector(n, _rng(args, 2))
        b = toeplitz_matvec(col, row, planted)
    x = toeplitz_solve(col, row, b, args.eps)
    _emit_vector(args, x)
    rep = {"n": n, "residual": _rel(toeplitz_matvec(col, row, x), b)}
    if planted is not None:
        rep["planted_error"] = _rel(x, planted)
    if args.oracle:
        rep["error"] = _rel(x, dense_solve(dense_toeplitz(col, row), b))
    return rep


def cmd_logkernel(args):
    roots = _knots(args)
    n = len(roots)
    if args.targets:
        targets = _read(args.targets[5:] if args.targets.startswith("file:") else args.targets)
    else:
        m = args.points or 2 * n
        targets = KnotSet.grid(1.0, m).values
    if args.coefficients:
        vals, coef = log_kernel_eval_from_roots(roots, targets, args.eps, return_coefficients=True)
        _emit_vector(args, coef)
    else:
        vals = log_kernel_eval_from_roots(roots, targets, args.eps)
        _emit_vector(args, vals)
    rep = {"n": n, "targets": int(targets.size)}
    if args.oracle:
        ref = np.prod(targets[:, None] - np.asarray(roots)[None, :], axis=1)
        rep["error"] = float(np.max(np.abs(vals - ref) / np.abs(ref)))
    return rep


# parser ----------------------------------------------------------------

def _common(p):
    p.add_argument("--n", type=int, default=256, help="problem size (default 256)")
    p.add_argument("--eps", type=float, default=1e-8, help="approximation tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=0, help="seed for numpy's PCG64 generator")
    p.add_argument("--knots", default="circle",
                   help="circle | annulus | clustered | perturbed | file:PATH (default circle)")
    p.add_argument("--oracle", action="store_true", help="compare against a dense computation")
    p.add_argument("--out", metavar="PATH", help="write the result here")
    p.add_argument("--input", metavar="PATH", help="input vector file ('-' for stdin); random if omitted")


def build_parser():
    parser = _Parser(prog="structmat", description="Fast structured-matrix computations.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=fn)
        return p

    def gen_opts(p):
        p.add_argument("--gen", metavar="PATH", help="generator file")
        p.add_argument("--class", dest="cls", choices=GEN_CLASSES, default="toeplitz",
                       help="random generator class when --gen is absent")

    gen_opts(verb("gen", cmd_gen, "write a random generator"))
    gen_opts(verb("matvec", cmd_matvec, "generator times vector"))
    gen_opts(verb("solve", cmd_solve, "solve with a generator-represented matrix"))
    p = verb("transform", cmd_transform, "apply structure maps to a generator")
    gen_opts(p)
    p.add_argument("--map", action="append", choices=sorted(MAP_BUDGET), help="map name, repeatable")
    p = verb("hss-report", cmd_hss_report, "rank and bound report of a CV approximation")
    p.add_argument("--e", type=complex, default=1.0, help="grid scale of the columns")
    p.add_argument("--fcf", action="store_true", help="use the Toeplitz-pipeline knots")
    p = verb("bench", cmd_bench, "scaling benchmark (CSV)")
    p.add_argument("--sizes", help="comma-separated powers of two (default --n)")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--op", choices=BENCH_OPS, default="cvmatvec")
    p = verb("eval", cmd_eval, "polynomial multipoint evaluation")
    p.add_argument("--degree", type=int, help="polynomial degree (default n-1)")
    verb("interp", cmd_interp, "polynomial interpolation")
    for name, fn, h in (("vmatvec", cmd_vmatvec, "Vandermonde product"),
                        ("vsolve", cmd_vsolve, "Vandermonde solve")):
        verb(name, fn, h).add_argument("--transpose", action="store_true")
    for name, fn, h in (("cvmatvec", cmd_cvmatvec, "CV Cauchy product"),
                        ("cvsolve", cmd_cvsolve, "CV Cauchy solve")):
        verb(name, fn, h).add_argument("--e", type=complex, default=1.0, help="grid scale")
    p = verb("tsolve", cmd_tsolve, "Toeplitz solve")
    p.add_argument("--col", metavar="PATH", help="first column file")
    p.add_argument("--row", metavar="PATH", help="first row file (default: symmetric)")
    p = verb("logkernel", cmd_logkernel, "product over roots via the log kernel")
    p.add_argument("--targets", metavar="PATH", help="target file (default: roots of unity)")
    p.add_argument("--points", type=int, help="number of unity-root targets (default 2n)")
    p.add_argument("--coefficients", action="store_true",
                   help="also return IDFT coefficients (targets must be roots of unity)")
    return parser


def main(argv=None):
    """Run the command line; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.n < 1:
            raise UsageError("--n must be positive")
        if not args.eps > 0:
            raise UsageError("--eps must be positive")
        t0 = time.perf_counter()
        rep = args.func(args)
        wall = time.perf_counter() - t0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc.token}: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, StructMatError) as exc:
        print(f"error: {exc.token}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    if rep is not None:
        rep = dict(rep, command=" ".join(["structmat"] + list(sys.argv[1:] if argv is None else argv)),
                   epsilon=args.eps, seed=args.seed, wall_time=round(wall, 6))
        print(json.dumps(rep, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())

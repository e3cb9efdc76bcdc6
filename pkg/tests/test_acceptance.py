"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import time

import numpy as np
import pytest

from structmat.core import dense_cauchy, dense_toeplitz, dft, idft, unity_powers
from structmat.displacement import (OperatorDescriptor as Op, displacement_dense, generator_from_dense,
                                    recover_dense, toeplitz_generator)
from structmat.exceptions import IllConditionedError, SingularMatrixError
from structmat.hss import build_cv_hss, taylor_low_rank
from structmat.knots import KnotSet
from structmat.sampling import dominant_toeplitz, sample_knots, sample_vector, singular_toeplitz
from structmat.solvers import (CauchyLikeOperand, cached_cv_hss, cauchy_any_knots_matvec, cv_matvec,
                               cv_solve, toeplitz_solve, vandermonde_matvec, vandermonde_solve)
from structmat.solvers.cauchy import cauchy_like_hss
from structmat.transforms import COMPOSITES, MAP_BUDGET, apply_map, toeplitz_to_cauchy_dft

from helpers import MAP_INPUT, crandn, map_multiplied, random_toeplitz_gen, ring, start_generator

pytestmark = pytest.mark.acceptance


def verdict(capsys, number, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = (f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'} "
            f"({detail}; {elapsed:.2f} s of {limit:g} s)")
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_01_separation_bound(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    violations, worst = 0, 0.0
    for _ in range(1000):
        m, p = rng.integers(1, 65, 2)
        theta = rng.uniform(0.3, 0.5)
        c = complex(*rng.uniform(-2, 2, 2))
        delta = rng.uniform(0.2, 3.0)
        s = c + delta * rng.uniform(1, 3, m) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
        s[0] = c + delta * np.exp(2j * np.pi * rng.uniform())
        t = c + theta * delta * np.sqrt(rng.uniform(0, 1, p)) * np.exp(2j * np.pi * rng.uniform(0, 1, p))
        # one knot on each extreme so the certificate attains the sampled theta and delta
        t[0] = c + theta * delta * np.exp(2j * np.pi * rng.uniform())
        C = dense_cauchy(s, t)
        for k in range(1, 21):
            blk = taylor_low_rank(s, t, c, k)
            err = np.abs(C - blk.to_dense()).max()
            violations += int(not err <= blk.error_bound)
            worst = max(worst, err / blk.error_bound)
    verdict(capsys, 1, "separation bound", violations == 0,
            f"{violations} violations in 20000 checks, worst error/bound {worst:.3f}",
            time.perf_counter() - t0, 5)


def _pattern_pairs(n, rng):
    # Vandermonde knots near the unit circle, the well-conditioned subclass
    s = KnotSet(ring(rng, n, 0.95, 1.05))
    t = KnotSet(crandn(rng, n) + 4)
    return {
        "t": (Op.shift(1, n), Op.shift(-1, n)),
        "h": (Op.shift(1, n), Op.shift_t(-1, n)),
        "v": (Op.diagonal(s), Op.shift(0, n)),
        "vt": (Op.shift_t(0, n), Op.diagonal(s)),
        "c": (Op.diagonal(s), Op.diagonal(t)),
    }


def test_criterion_02_displacement_round_trip(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst, count = 0.0, 0
    for pattern in ("t", "h", "v", "vt", "c"):
        for _ in range(100):
            n = int(rng.integers(1, 65))
            A, B = _pattern_pairs(n, rng)[pattern]
            M = crandn(rng, n, n)
            gen = generator_from_dense(M, A, B, tol=0)
            assert np.allclose(gen.F @ gen.G.T, displacement_dense(M, A, B))
            worst = max(worst, np.linalg.norm(recover_dense(gen) - M, 2) / np.linalg.norm(M, 2))
            count += 1
    verdict(capsys, 2, "displacement round trip", worst <= 1e-10,
            f"{count} matrices over 5 patterns, worst relative error {worst:.2e}",
            time.perf_counter() - t0, 10)


def test_criterion_03_transform_ledger(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    over_budget, worst = [], 0.0
    for name in sorted(MAP_BUDGET):
        for n in (4, 16, 32):
            gen = start_generator(MAP_INPUT[name], rng, n)
            if name == "tc-dft":
                gen = random_toeplitz_gen(rng, n)
            cur, M = gen, recover_dense(gen)
            for step in COMPOSITES.get(name, (name,)):
                nxt = apply_map(cur, step)
                M = map_multiplied(step, cur, nxt, M)
                cur = nxt
            if cur.length > gen.length + MAP_BUDGET[name]:
                over_budget.append(name)
            err = np.abs(recover_dense(cur) - M).max() / max(1.0, np.abs(M).max())
            worst = max(worst, err)
    verdict(capsys, 3, "transform ledger", not over_budget and worst <= 1e-8,
            f"{len(MAP_BUDGET)} maps, over budget: {over_budget or 'none'}, worst dense error {worst:.2e}",
            time.perf_counter() - t0, 10)


def test_criterion_04_cv_matvec_accuracy(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    ratios = []
    for n in (256, 1024):
        s = sample_knots("circle", n, rng)
        u = sample_vector(n, rng)
        y = cv_matvec(s, 1.0, u, 1e-8)
        err = np.abs(y - dense_cauchy(s, unity_powers(n)) @ u).max()
        ratios.append(err / (n * 1e-8 * np.abs(u).max()))
    verdict(capsys, 4, "CV matvec accuracy", max(ratios) <= 1,
            "error / (n eps ||u||) = " + ", ".join(f"{r:.2e}" for r in ratios),
            time.perf_counter() - t0, 30)


def _median_times(fns, rounds):
    # interleave sizes so drift in machine load hits every size alike
    times = {n: [] for n in fns}
    for _ in range(rounds):
        for n, fn in fns.items():
            t = time.perf_counter()
            fn()
            times[n].append(time.perf_counter() - t)
    return {n: float(np.median(v)) for n, v in times.items()}


def test_criterion_05_near_linear_scaling(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    sizes = [2 ** p for p in range(10, 15)]
    fast, dense = {}, {}
    for n in sizes:
        s = sample_knots("circle", n, rng)
        u = sample_vector(n, rng)
        cached_cv_hss(s, 1.0, 1e-8)  # construction is not part of the product
        fast[n] = (lambda s=s, u=u: cv_matvec(s, 1.0, u, 1e-8))
        M = CauchyLikeOperand.cauchy(s, KnotSet.grid(1.0, n))
        dense[n] = (lambda M=M, u=u: M.exact_matvec(u))
        fast[n]()
    tf = _median_times(fast, 15)
    td = _median_times(dense, 5)
    rf = [tf[b] / tf[a] for a, b in zip(sizes, sizes[1:])]
    rd = [td[b] / td[a] for a, b in zip(sizes, sizes[1:])]
    ok = max(rf) <= 2.6 and min(rd) >= 3.5
    verdict(capsys, 5, "near-linear scaling", ok,
            "cv ratios " + ", ".join(f"{r:.2f}" for r in rf)
            + "; dense ratios " + ", ".join(f"{r:.2f}" for r in rd),
            time.perf_counter() - t0, 120)


def test_criterion_06_logarithmic_rank_growth(capsys):
    t0 = time.perf_counter()
    sizes = [2 ** p for p in range(8, 13)]
    cv, fcf = [], []
    for n in sizes:
        rng = np.random.default_rng([606, n])
        cv.append(build_cv_hss(sample_knots("circle", n, rng), 1.0, 1e-8).rho)
        col, row = dominant_toeplitz(n, rng)
        cg = toeplitz_to_cauchy_dft(toeplitz_generator(col, row, 1, -1))
        M = CauchyLikeOperand(cg.A.knots, cg.B.knots, cg.F, cg.G)
        fcf.append(cauchy_like_hss(M, 1e-8).base.rho)
    steps = np.diff(cv)
    ok = steps.max() <= 3 and fcf[-1] - fcf[0] <= 2 and max(fcf) - min(fcf) <= 2
    verdict(capsys, 6, "logarithmic rank growth", ok,
            f"CV ranks {cv}, FCF ranks {fcf}", time.perf_counter() - t0, 120)


def test_criterion_07_toeplitz_solve(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    n = 512
    col, row = dominant_toeplitz(n, rng)
    T = dense_toeplitz(col, row)
    x = sample_vector(n, rng)
    b = T @ x
    got = toeplitz_solve(col, row, b, 1e-8)
    err = np.linalg.norm(got - x) / np.linalg.norm(x)
    res = np.linalg.norm(T @ got - b) / np.linalg.norm(b)
    verdict(capsys, 7, "Toeplitz solve", err <= 1e-5 and res <= 1e-6,
            f"relative error {err:.2e}, relative residual {res:.2e}", time.perf_counter() - t0, 30)


def test_criterion_08_vandermonde_pipelines(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    n = 256
    s = sample_knots("perturbed", n, rng)
    u = sample_vector(n, rng)
    rt = np.linalg.norm(vandermonde_solve(s, vandermonde_matvec(s, u, 1e-10), 1e-10) - u) / np.linalg.norm(u)
    w = unity_powers(n)
    d1 = np.abs(vandermonde_matvec(w, u, 1e-10) - dft(u)).max() / np.abs(dft(u)).max()
    d2 = np.abs(vandermonde_solve(w, u, 1e-10) - idft(u)).max() / np.abs(idft(u)).max()
    verdict(capsys, 8, "Vandermonde pipelines", rt <= 1e-5 and max(d1, d2) <= 1e-12,
            f"round trip {rt:.2e}, dft {d1:.1e}, idft {d2:.1e}", time.perf_counter() - t0, 10)


def test_criterion_09_mobius_reductions(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    n = 128
    z = np.exp(2j * np.pi * rng.uniform(0, 1, 2 * n))
    M = CauchyLikeOperand(z[:n], z[n:], crandn(rng, n, 2), crandn(rng, n, 2))
    u = sample_vector(n, rng)
    y, rep = cauchy_any_knots_matvec(M, u, 1e-8, return_report=True)
    err = np.abs(y - M.to_dense() @ u).max()
    ok = rep.route == "circle" and err <= rep.bound and rep.max_imag <= 1e-10
    verdict(capsys, 9, "Mobius reductions", ok,
            f"route {rep.route}, error {err:.2e} vs bound {rep.bound:.2e}, max imag {rep.max_imag:.1e}",
            time.perf_counter() - t0, 10)


def test_criterion_10_fail_closed(capsys):
    t0 = time.perf_counter()
    silent, wrong_class = 0, 0
    for seed in range(50):
        rng = np.random.default_rng([1010, seed])
        s = sample_knots("clustered", 64, rng)
        try:
            cv_solve(s, 1.0, sample_vector(64, rng), 1e-8)
            silent += 1
        except IllConditionedError:
            pass
        except Exception:
            wrong_class += 1
        col, row = singular_toeplitz(64, rng)
        try:
            toeplitz_solve(col, row, sample_vector(64, rng), 1e-8)
            silent += 1
        except SingularMatrixError:
            pass
        except Exception:
            wrong_class += 1
    verdict(capsys, 10, "fail-closed conditioning", silent == 0 and wrong_class == 0,
            f"100 fixtures, {silent} silent answers, {wrong_class} wrong error classes",
            time.perf_counter() - t0, 30)

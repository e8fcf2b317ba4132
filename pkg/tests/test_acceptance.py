"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N PASS|FAIL: detail`` line that the pytest
terminal summary prints.  Run as a script to get the lines on stdout.
"""
import math
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE, e1  # noqa: E402
from hardykit import Scenario, derive_exponents, evaluate_scenario, piecewise, power  # noqa: E402
from hardykit._numerics import GridFn, LogGrid, Tail  # noqa: E402
from hardykit.discretize import check_clauses, discretizing_sequence  # noqa: E402
from hardykit.oracle import best_lower, lattice_ascent, lattice_exhaustive  # noqa: E402
from hardykit.stieltjes import check_nondegenerate, fundamental_function, fundamental_profile, with_density  # noqa: E402
from hardykit.weights import U_envelope, dual_transform  # noqa: E402

# pinned tolerances and windows
C1_CLOSED, C1_QUAD, C1_SECONDS = 1e-9, 1e-4, 1.0
WINDOW = (1.0, 50.0)
STABLE = 0.20
C2_SECONDS = 120.0
GROWTH = 2.0
C5_CLOSED, C5_QUAD = 1e-6, 1e-3
C6_RTOL = 1e-6


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE[n] = line
    print(line)


def conj(p):
    return INF if p == 1 else p / (p - 1.0)


INF = math.inf


def balanced_u(ex, b1, b2, gap=0.0):
    """Outer exponent making the power scenario scale invariant (gap = 0)."""
    s = (b1 / ex.p1 - 1.0 / conj(ex.p1)) + (b2 / ex.p2 - 1.0 / conj(ex.p2)) + gap
    return ex.q * s - 1.0


def certify(sc, cells=64):
    c = evaluate_scenario(sc).constant
    l1 = best_lower(sc, cells).value
    l2 = best_lower(sc, 2 * cells).value
    r1, r2 = c / l1, c / l2
    stable = abs(r2 / r1 - 1.0) < STABLE
    return c, r1, r2, stable


def window_summary(rows):
    rs = [r[1] for r in rows]
    inside = sum(WINDOW[0] <= r <= WINDOW[1] for r in rs)
    stable = sum(r[3] for r in rows)
    return inside, stable, min(rs), max(rs)


# ---------------------------------------------------------------------------
def test_criterion_1():
    t = time.perf_counter()
    closed = evaluate_scenario(e1()).constant
    quad = evaluate_scenario(e1(), method="quad").constant
    dt = time.perf_counter() - t
    ok = abs(closed - 0.5) <= C1_CLOSED and abs(quad - 0.5) <= C1_QUAD and dt < C1_SECONDS
    record(1, ok, f"E1 closed={closed!r} quad={quad!r} in {dt:.2f}s")
    assert ok


def t52_suite():
    out = []
    for (p1, p2, q) in [(2, 2, 2), (1.5, 2, 2), (2, 2, 3), (1.5, 1.5, 2), (2, 3, 3), (3, 3, 4), (2, 2, 4)]:
        ex = derive_exponents(1, p1, p2, q)
        for b1, b2 in [(3, 3), (2, 4), (4, 2.5), (5, 3.5)]:
            if b1 * (conj(p1) - 1) <= 1 or b2 * (conj(p2) - 1) <= 1:
                continue
            a = balanced_u(ex, b1, b2)
            if a > -1:
                out.append(Scenario(ex, power(1, a), power(1, b1), power(1, b2), name=f"T52 {p1},{p2},{q} {b1},{b2}"))
    return out


def test_criterion_2():
    t = time.perf_counter()
    suite = [sc for sc in t52_suite() if sc.case.startswith("T52")]
    rows = [certify(sc) for sc in suite]
    dt = time.perf_counter() - t
    finite = all(math.isfinite(r[0]) for r in rows)
    inside, stable, lo, hi = window_summary(rows)
    n = len(rows)
    ok = n >= 20 and finite and inside == n and stable == n and dt < C2_SECONDS
    record(2, ok, f"{n} T52 scenarios, B/l in window {inside}/{n} (range {lo:.3f}..{hi:.3f}), "
                  f"stable {stable}/{n}, {dt:.0f}s")
    assert ok


# piecewise powers with one break at 1: exponents below and above
C3_SETS = {
    "T53i": [((1.28, 2.47), (2.84, 3.45), (-0.45, 2.25)), ((0.74, 1.32), (3.59, 4.46), (-0.09, 4.6)),
             ((2.44, -0.11), (2.62, 1.88), (2.57, 2.96)), ((0.83, 0.38), (1.74, 2.94), (-0.39, 1.28)),
             ((2.15, 0.08), (4.52, 2.58), (0.98, 4.62)), ((0.4, 1.17), (2.15, 2.79), (0.22, 4.77)),
             ((0.59, 1.7), (1.73, 4.17), (0.76, 3.55)), ((-0.06, 2.6), (1.84, 3.83), (-0.6, 2.57)),
             ((2.14, 0.92), (4.32, 4.51), (0.86, 3.42)), ((2.81, 0.81), (4.64, 1.44), (1.25, 3.54))],
    "T53ii": [((2.86, 1.23), (1.79, 4.16), (0.74, 3.82)), ((2.02, 0.58), (4.37, 1.36), (2.03, 4.26)),
              ((2.79, 0.1), (1.46, 2.28), (3.31, 4.62)), ((2.21, 0.12), (1.76, 2.14), (2.69, 4.94)),
              ((1.44, 1.05), (2.9, 4.76), (-0.17, 4.79)), ((1.24, 0.19), (3.77, 2.08), (1.75, 3.28)),
              ((2.92, 0.53), (2.22, 1.15), (-0.68, 4.41)), ((1.59, 0.98), (2.34, 4.38), (0.6, 2.11)),
              ((1.91, -0.2), (4.77, 1.99), (0.47, 3.56)), ((2.07, 1.22), (4.82, 4.2), (2.43, 3.09))],
}


def _pw(lo_hi):
    return piecewise([1.0], [1.0, 1.0], list(lo_hi))


def c3_iterated(case, rng):
    """Random iterated piecewise-power scenarios that hold, for case I1 or I3."""
    p, q, th = (2.0, 2.0, 1.0) if case == "I1" else (1.0, 2.0, 2.0)
    ex = derive_exponents(1, max(th, 1), max(th, 1), q, th, p)
    out = []
    while len(out) < 10:
        r2 = lambda lo, hi: tuple(round(float(x), 2) for x in rng.uniform(lo, hi, 2))  # noqa: E731
        sc = Scenario(ex, _pw(r2(-0.5, 3)), _pw(r2(-1, 5)), mu=with_density(_pw(r2(-2, 2))), mode="iterated")
        rep = evaluate_scenario(sc)
        if rep.verdict == "holds" and math.isfinite(rep.constant) and rep.constant > 0:
            out.append(sc)
    return out


def c3_suites():
    suites = {}
    for case, sets in C3_SETS.items():
        ex = derive_exponents(1, 2.0, 1.0 if case == "T53i" else 2.0, 1.0)
        suites[case] = [Scenario(ex, _pw(u), _pw(v1), _pw(v2)) for u, v1, v2 in sets]
    rng = np.random.default_rng(7)
    for case in ("I1", "I3"):
        suites[case] = c3_iterated(case, rng)
    return suites


def _pre_ok(rep) -> bool:
    return all(v is True or v == "ok" for v in rep.preconditions.values())


def test_criterion_3():
    parts, ok = [], True
    for case, suite in c3_suites().items():
        reps = [evaluate_scenario(sc) for sc in suite]
        right_case = all(r.case == case for r in reps)
        pre = sum(_pre_ok(r) for r in reps)
        rows = [certify(sc) for sc in suite]
        inside, stable, lo, hi = window_summary(rows)
        n = len(rows)
        ok &= n >= 10 and right_case and pre == n and inside == n and stable == n
        parts.append(f"{case}: pre {pre}/{n}, window {inside}/{n} ({lo:.2f}..{hi:.2f}), stable {stable}/{n}")
    record(3, ok, "; ".join(parts))
    assert ok


def test_criterion_4():
    rows = []
    for (p1, p2, q, b1, b2, gap) in [(2, 2, 2, 3, 3, 0.15), (2, 2, 2, 3, 3, -0.15), (2, 2, 2, 2, 4, 0.25),
                                     (2, 2, 3, 3, 3, -0.25), (1.5, 2, 2, 3, 3, 0.2), (2, 2, 2, 3, 3, 0.4)]:
        ex = derive_exponents(1, p1, p2, q)
        sc = Scenario(ex, power(1, balanced_u(ex, b1, b2, gap)), power(1, b1), power(1, b2))
        const = evaluate_scenario(sc).constant
        bounds = [best_lower(sc, n).value for n in (64, 128, 256)]
        g = (bounds[1] / bounds[0], bounds[2] / bounds[1])
        rows.append((const, g, bounds[0] < bounds[1] < bounds[2] and min(g) >= GROWTH))
    n = len(rows)
    good = sum(r[2] and math.isinf(r[0]) for r in rows)
    worst = min(min(r[1]) for r in rows)
    ok = n >= 5 and good == n
    record(4, ok, f"{good}/{n} imbalanced scenarios infinite with oracle growth >= {GROWTH:g}x per doubling "
                  f"(smallest factor {worst:.2f})")
    assert ok


def _ball_twin(ex, a, b1, b2):
    """Ball-form power weights whose dual transform is t^a, |x|^b1, |x|^b2."""
    n = ex.n
    ka = 0.0 if math.isinf(ex.q) else -2.0
    vk = lambda p: 2.0 * n if math.isinf(p) else 2.0 * n * (p - 1.0)  # noqa: E731
    return Scenario(ex, power(1, -a + ka), power(1, -b1 + vk(ex.p1), n), power(1, -b2 + vk(ex.p2), n), form="ball")


def test_criterion_5():
    worst_c = worst_q = 0.0
    count = 0
    for n in (1, 2):
        for (p1, p2, q) in [(2, 2, 2), (1.5, 2, 2), (2, 2, 3), (2, 3, 3), (3, 3, 2), (2, 2, 1.5)]:
            ex = derive_exponents(n, p1, p2, q)
            b1, b2 = 3.0 * n, 2.5 * n
            a = balanced_u(ex, b1, b2)
            direct = evaluate_scenario(Scenario(ex, power(1, a), power(1, b1, n), power(1, b2, n))).constant
            ball = _ball_twin(ex, a, b1, b2)
            closed = evaluate_scenario(dual_transform(ball)).constant
            quad = evaluate_scenario(dual_transform(ball, method="pointwise"), method="quad").constant
            worst_c = max(worst_c, abs(closed / direct - 1.0))
            worst_q = max(worst_q, abs(quad / direct - 1.0))
            count += 1
    ok = count >= 10 and worst_c <= C5_CLOSED and worst_q <= C5_QUAD
    record(5, ok, f"{count} scenarios, max rel diff closed {worst_c:.1e}, quadrature {worst_q:.1e}")
    assert ok


def test_criterion_6():
    U = U_envelope(power(1, 0))
    m = with_density(power(1, -0.5))
    xs = np.array([0.1, 1.0, 10.0])
    err = float(np.max(np.abs(fundamental_function(m, U, 1.0, xs) / (math.pi * np.sqrt(xs)) - 1.0)))
    nondeg = check_nondegenerate(m, U, 1.0)
    grid = LogGrid()
    phi = fundamental_profile(m, U, 1.0, grid)
    b = GridFn(grid, grid.t.copy(), Tail(1.0), Tail(1.0))
    seq = discretizing_sequence(phi, b, 2.0)
    cell = math.log(grid.t[1] / grid.t[0])
    off = float(np.max(np.abs(np.log(seq.points / 4.0 ** seq.ks))))
    clauses = check_clauses(seq, phi, b)["all"]
    ok = err <= C6_RTOL and nondeg == "ok" and off <= cell and clauses and seq.D == 4.0
    record(6, ok, f"phi rel err {err:.1e}, nondegenerate={nondeg}, {len(seq.idx)} points within "
                  f"{off / cell:.2f} cells of 4^k, clauses {'ok' if clauses else 'FAIL'}, D={seq.D:g}")
    assert ok


def test_criterion_7():
    import test_properties as tp
    from test_weights import test_calU_symmetry_exact

    suites = [tp.test_geometric_sums, tp.test_resonance, tp.test_stieltjes_by_parts, test_calU_symmetry_exact,
              tp.test_scaling_covariance, tp.test_oracle_determinism, tp.test_discretizing_clauses]
    failed = []
    for fn in suites:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001
            failed.append(f"{fn.__name__} ({type(exc).__name__})")
    ok = not failed
    record(7, ok, f"{len(suites) - len(failed)}/{len(suites)} property suites at 200 examples"
                  + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok


def test_criterion_8():
    rng = np.random.default_rng(8)
    equal = 0
    total = 60
    for _ in range(total):
        p1, p2 = rng.choice([1.5, 2.0, 3.0], 2)
        q = float(rng.choice([1.0, 2.0, 3.0]))
        ex = derive_exponents(1, float(p1), float(p2), q)
        w = lambda: piecewise([1.0], [float(rng.uniform(0.5, 2.0)), 1.0], list(rng.uniform(-0.5, 3.0, 2)))  # noqa: E731
        sc = Scenario(ex, w(), w(), w())
        equal += lattice_ascent(sc, 2) == lattice_exhaustive(sc, 2)
    ok = total >= 50 and equal == total
    record(8, ok, f"alternating ascent == exhaustive lattice on {equal}/{total} random 2-cell scenarios")
    assert ok


if __name__ == "__main__":
    status = 0
    for k in range(1, 9):
        try:
            globals()[f"test_criterion_{k}"]()
        except AssertionError:
            status = 1
    sys.exit(status)

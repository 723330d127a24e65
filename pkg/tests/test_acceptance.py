"""Acceptance criteria 1-10, each run at its stated tolerance and time budget.

Every test prints one PASS/FAIL line; the lines are collected in RESULTS
and repeated in the pytest terminal summary (see conftest.py). Running
this file directly prints the lines without pytest.
"""
import random
import time
from collections import Counter
from fractions import Fraction

import mpmath
import pytest

from wcps.bdlab import (
    F_at,
    bridge_identity_series,
    defect_profile,
    main_theorem_pipeline,
    realize_comb,
    wcps_to_brs,
)
from wcps.cfrac import cf_expand, gl_condition, gl_majorant
from wcps.exactnum import QuadNum, parse_quad
from wcps.regions import EllipseCurve, GraphCurve, ParametricCurve, PolygonRegion, curvature
from wcps.rotation import delta_t_series, kesten_test
from wcps.scheme import count_points, density, enumerate_points, fibonacci_preset, quad_normalize, split_scheme
from wcps.weights import PiecewiseLinear, make_c2_dome, make_hat

TAU = parse_quad("1/2+1/2*sqrt(5)")
SQRT5 = parse_quad("sqrt(5)")
RESULTS = []


def report(num, label, ok, detail, elapsed, budget):
    within = elapsed < budget
    line = (f"{'PASS' if ok and within else 'FAIL'} criterion {num}: {label} "
            f"[{detail}; {elapsed:.3g}s of {budget:g}s]")
    print(line)
    RESULTS.append(line)
    assert ok, line
    assert within, line


@pytest.fixture(scope="module")
def fib():
    return fibonacci_preset("full")


@pytest.fixture(scope="module")
def half():
    return fibonacci_preset("half")


def test_criterion_01_kesten_exact():
    t0 = time.perf_counter()
    a = kesten_test(TAU, TAU)
    b = kesten_test(TAU / 2, TAU)
    el = time.perf_counter() - t0
    ok = str(a) == "in_lattice(0,1)" and str(b) == "not_in"
    report(1, "Kesten dichotomy", ok, f"tau -> {a}, tau/2 -> {b}", el, 1e-3)


def test_criterion_02_density(fib):
    t0 = time.perf_counter()
    m = float(TAU / SQRT5)
    devs = {T: abs(count_points(fib, 0, T) / T - m) for T in (10 ** 3, 10 ** 4)}
    el = time.perf_counter() - t0
    ok = all(devs[T] <= 2 / T for T in devs)
    report(2, "Fibonacci density", ok, ", ".join(f"T={T}: dev {d:.2e}" for T, d in devs.items()), el, 5)


def test_criterion_03_defect_bounded_and_growth(fib, half):
    t0 = time.perf_counter()
    p = defect_profile(realize_comb(fib, None, 10 ** 4), None, [10 ** 3, 10 ** 4])
    q = defect_profile(realize_comb(half, None, 10 ** 5), None, [10 ** 2, 10 ** 5])
    el = time.perf_counter() - t0
    f3, f4 = p.stat(10 ** 3), p.stat(10 ** 4)
    h2, h5 = q.stat(10 ** 2), q.stat(10 ** 5)
    ok = f4 <= 1.2 * f3 and h5 >= h2 + 1
    report(3, "defect plateau (full) and growth (half)", ok,
           f"full {f3:.4f}->{f4:.4f}; half {h2:.4f}->{h5:.4f}", el, 60)


def test_criterion_04_weighted_plateau(fib):
    t0 = time.perf_counter()
    W = fib.window
    hat = make_hat((W.a, W.b), 0, 1)
    dome = make_c2_dome((W.a, W.b), 1)
    m_ok = density(fib, hat) == hat.integral() / SQRT5
    reps = {name: main_theorem_pipeline(fib, h, atom_checkpoints=(10 ** 3, 10 ** 4, 10 ** 5), T0=10 ** 3)
            for name, h in (("hat", hat), ("dome", dome))}
    el = time.perf_counter() - t0
    ok = m_ok and all(r["plateau"] for r in reps.values())
    detail = "; ".join(
        f"{k} max|F| {r['checkpoints'][0]['max_abs']:.4f}->{r['checkpoints'][-1]['max_abs']:.4f}"
        for k, r in reps.items())
    report(4, "hat and dome combs plateau", ok, detail + f"; exact hat m {m_ok}", el, 300)


def _hats(fib):
    W = fib.window
    return [
        make_hat((W.a, W.b), 0, 1),
        make_hat((W.a, W.b), Fraction(1, 2), 2),
        make_hat((W.a, W.b), -1 / TAU / 2, Fraction(1, 3)),
        make_hat((W.a, W.b), TAU - 1, 1),
        PiecewiseLinear((W.a, QuadNum(0), Fraction(1, 2), W.b), (0, 1, Fraction(1, 2), 0)),
    ]


def test_criterion_05_bridge_identity(fib):
    t0 = time.perf_counter()
    exact_ok, worst, checks = True, mpmath.mpf(0), 0
    for h in _hats(fib):
        for b in wcps_to_brs(fib, h)["bridges"]:
            ex = bridge_identity_series(b, 100)
            nu = bridge_identity_series(b, 100, numeric=True)
            exact_ok &= all(r["difference"] == 0 for r in ex)
            worst = max([worst] + [abs(r["difference"]) for r in nu])
            checks += len(ex)
    el = time.perf_counter() - t0
    ok = exact_ok and worst <= mpmath.mpf(10) ** -15
    report(5, "bridge identity, 5 hats, t=1..100", ok,
           f"{checks} exact checks all zero: {exact_ok}; numeric max diff {mpmath.nstr(worst, 3)}", el, 30)


def test_criterion_06_additivity():
    t0 = time.perf_counter()
    h = Fraction(1, 2)
    P = PolygonRegion.from_vertices([(0, h), (h, 1), (1, h), (h, 0)])
    Q = PolygonRegion.from_vertices([(0, 0), (Fraction(1, 5), 0), (0, Fraction(1, 5))])
    rng = random.Random(2024)
    ts = [QuadNum(Fraction(rng.randrange(1, 10 ** 6), 10 ** 4)) for _ in range(100)]
    x = (QuadNum(Fraction(1, 7)), QuadNum(Fraction(3, 11)))
    a = delta_t_series(P.union(Q), TAU, x, ts)
    b = delta_t_series(P, TAU, x, ts)
    c = delta_t_series(Q, TAU, x, ts)
    el = time.perf_counter() - t0
    bad = sum(1 for u, v, w in zip(a, b, c) if u - v - w != 0)
    report(6, "BRS additivity", bad == 0, f"{len(ts)} random t, nonzero residuals {bad}", el, 10)


def test_criterion_07_splitting(fib):
    t0 = time.perf_counter()
    norm = quad_normalize(fib)
    s = norm.scheme
    h = norm.transport_weight(make_hat((fib.window.a, fib.window.b), 0, 1))
    whole_pts = Counter(enumerate_points(s, 0, 100).directs())
    whole = realize_comb(s, h, 100)
    events = whole.positions.to_list() + [QuadNum(100)]
    ok = True
    for n in (2, 3):
        subs = split_scheme(s, n)
        parts = Counter()
        for sc in subs:
            parts.update(enumerate_points(sc, 0, 100).directs())
        ok &= parts == whole_pts
        combs = [realize_comb(sc, h, 100) for sc in subs]
        for t in events:
            ok &= F_at(whole, whole.density, t) == sum((F_at(c, c.density, t) for c in combs), QuadNum(0))
    el = time.perf_counter() - t0
    report(7, "splitting lemma n=2,3", ok, f"{len(whole_pts)} points, {len(events)} events", el, 5)


def test_criterion_08_normalization(fib):
    t0 = time.perf_counter()
    q = quad_normalize(fib)
    B = fib.basis
    basis_ok = all(
        tuple(q.M[i][0] * B[0][j] + q.M[i][1] * B[1][j] for i in range(2)) == (QuadNum(e[0]), QuadNum(e[1]))
        for j, e in enumerate(((1, 0), (0, 1))))
    al = q.scheme.slope
    slope_ok = al.d == 5 and not al.is_rational
    orig = enumerate_points(fib, 0, 100)
    new = enumerate_points(q.scheme, 0, q.kd * 100)
    pts_ok = [q.map_direct(x) for x in orig.directs()] == new.directs() and \
        [x * q.ki for x in orig.internal.to_list()] == new.internal.to_list()
    el = time.perf_counter() - t0
    report(8, "quadratic normalization", basis_ok and slope_ok and pts_ok,
           f"M exact {basis_ok}; alpha {al}; {len(orig)} points transported {pts_ok}", el, 1)


def test_criterion_09_gl_sums():
    t0 = time.perf_counter()
    r = gl_condition(cf_expand(TAU), 200)
    maj = gl_majorant(1)
    el = time.perf_counter() - t0
    hand = r.sums[0] == 1 and r.sums[1] == 3
    stable = r.converged and r.stable_at <= 200
    top = max(r.sums)
    above = maj > top
    report(9, "convergence sums for tau", hand and stable and above,
           f"S0={mpmath.nstr(r.sums[0], 5)}, S1={mpmath.nstr(r.sums[1], 5)}; stable at m={r.stable_at}; "
           f"majorant {mpmath.nstr(maj, 6)} vs max S {mpmath.nstr(top, 6)}", el, 1)


def test_criterion_10_curvature():
    t0 = time.perf_counter()
    with mpmath.workprec(256):
        parab = curvature(GraphCurve(lambda x: 2 * x, lambda x: mpmath.mpf(2)), 0)
        r = mpmath.mpf(3) / 2
        circ = ParametricCurve(lambda t: (-r * mpmath.sin(t), r * mpmath.cos(t)),
                               lambda t: (-r * mpmath.cos(t), -r * mpmath.sin(t)))
        circ_ok = all(abs(curvature(circ, th) - 1 / r) < mpmath.mpf(10) ** -60 for th in (0, 0.7, 2, 4))
        ell = curvature(EllipseCurve(2, 1), 0)
        g = GraphCurve(lambda x: 3 * x * x - 2 * x - 2 * mpmath.sin(x), lambda x: 6 * x - 2 - 2 * mpmath.cos(x))
        p = ParametricCurve(lambda t: (mpmath.mpf(1), 3 * t * t - 2 * t - 2 * mpmath.sin(t)),
                            lambda t: (mpmath.mpf(0), 6 * t - 2 - 2 * mpmath.cos(t)))
        gap = max(abs(curvature(g, x) - curvature(p, x)) for x in (-2 + mpmath.mpf(4) * k / 99 for k in range(100)))
    el = time.perf_counter() - t0
    ok = parab == 2 and circ_ok and abs(ell - 2) < mpmath.mpf(10) ** -60 and gap < 1e-12
    report(10, "curvature formulas", ok,
           f"parabola {mpmath.nstr(parab, 5)}, circle ok {circ_ok}, ellipse {mpmath.nstr(ell, 5)}, "
           f"graph/parametric gap {mpmath.nstr(gap, 3)}", el, 1)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))

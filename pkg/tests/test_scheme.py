import json
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wcps.exactnum import QuadNum, parse_quad
from wcps.scheme import (
    SchemeError,
    Window,
    build_scheme,
    count_points,
    density,
    enumerate_points,
    quad_normalize,
    scale_scheme,
    scheme_from_dict,
    scheme_to_dict,
    split_scheme,
    star_map,
)

TAU = parse_quad("1/2+1/2*sqrt(5)")


def brute_points(s, lo, hi, box=60):
    # oracle: every lattice point of a box through star_map; a generous float
    # prefilter on the direct coordinate only skips points far outside [lo, hi]
    E, o = s.effective()
    ef = [[float(x) for x in row] for row in E]
    m, n = np.meshgrid(np.arange(-box, box + 1), np.arange(-box, box + 1))
    dirf = float(o[0]) + ef[0][0] * m + ef[0][1] * n
    near = (dirf > float(lo) - 1) & (dirf < float(hi) + 1)
    out = []
    for mm, nn in zip(m[near], n[near]):
        p = star_map(s, (mm, nn))
        if p is not None and lo <= p.direct <= hi:
            out.append(p.direct)
    return sorted(out)


def test_fibonacci_first_points(fib):
    pts = enumerate_points(fib, 0, 6)
    assert pts.directs() == [QuadNum(0, 0, 5), TAU, TAU * TAU, 1 + 2 * TAU, 2 + 2 * TAU]


def test_fibonacci_density(fib):
    assert density(fib) == TAU / QuadNum.sqrt(5)
    assert str(density(fib)) == "1/2+1/10*sqrt(5)"


@pytest.mark.parametrize("lo,hi", [(0, 30), (-7, 12), (Fraction(1, 3), 25)])
def test_enumeration_matches_brute_force(fib, fib_half, lo, hi):
    for s in (fib, fib_half):
        assert enumerate_points(s, lo, hi).directs() == brute_points(s, QuadNum(lo), QuadNum(hi))


def test_gaps_two_lengths(fib):
    # Fibonacci gaps are 1 and tau only
    d = enumerate_points(fib, 0, 200).directs()
    assert {b - a for a, b in zip(d, d[1:])} == {QuadNum(1, 0, 5), TAU}


def test_oblique_and_orthogonal_match_brute_force():
    for axes, shear in (("orthogonal", None), ("oblique", Fraction(1, 3))):
        s = build_scheme(((1, 0), (0, 1)), (Fraction(1, 7), 0), slope=TAU - 1,
                         window=(0, 1), axes=axes, shear=shear)
        assert enumerate_points(s, -5, 15).directs() == brute_points(s, QuadNum(-5), QuadNum(15), box=30)


@settings(max_examples=25)
@given(st.fractions(-3, 3, max_denominator=9), st.fractions(Fraction(1, 4), 3, max_denominator=9),
       st.sampled_from(["half_open_right", "closed", "half_open_left"]))
def test_enumeration_property(a, length, conv):
    s = build_scheme(((1, TAU), (1, -1 / TAU)), (0, 0), None, (a, a + length), conv)
    got = enumerate_points(s, -10, 10).directs()
    assert got == brute_points(s, QuadNum(-10), QuadNum(10), box=40)


def test_window_conventions():
    w = Window(QuadNum(0), QuadNum(1), "half_open_right")
    assert w.contains(QuadNum(0)) and not w.contains(QuadNum(1))
    assert w.scaled(QuadNum(-1)).convention == "half_open_left"
    c = Window(QuadNum(0), QuadNum(1), "closed")
    assert c.contains(QuadNum(1))


def test_errors():
    with pytest.raises(SchemeError):
        build_scheme(((1, 0), (0, 1)), slope=Fraction(1, 2), window=(0, 1))
    with pytest.raises(SchemeError):
        build_scheme(((1, 2), (2, 4)), window=(0, 1))
    with pytest.raises(SchemeError):
        build_scheme(((1, TAU), (1, -1 / TAU)), window=(1, 1))
    with pytest.raises(SchemeError):
        build_scheme(((1, 1), (1, 2)), window=(0, 1))  # rational projections


def test_split_multiset(fib):
    s = quad_normalize(fib).scheme
    whole = Counter(enumerate_points(s, 0, 100).directs())
    for n in (2, 3):
        parts = Counter()
        for sub in split_scheme(s, n):
            parts.update(enumerate_points(sub, 0, 100).directs())
        assert parts == whole


def test_scale_scheme(fib):
    s = quad_normalize(fib).scheme
    half = scale_scheme(s, Fraction(1, 2))
    assert enumerate_points(half, 0, 10).directs() == [x / 2 for x in enumerate_points(s, 0, 20).directs()]


def test_quad_normalize_fibonacci(fib):
    q = quad_normalize(fib)
    assert q.alpha == TAU
    assert q.scheme.is_integer_lattice()
    # M maps the basis columns (1, 1), (tau, -1/tau) to the standard basis
    B = fib.basis
    for j, e in enumerate(((1, 0), (0, 1))):
        col = (B[0][j], B[1][j])
        img = tuple(q.M[i][0] * col[0] + q.M[i][1] * col[1] for i in range(2))
        assert img == (QuadNum(e[0]), QuadNum(e[1]))
    orig = enumerate_points(fib, 0, 100)
    new = enumerate_points(q.scheme, q.kd * 0, q.kd * 100)
    assert [q.map_direct(x) for x in orig.directs()] == new.directs()
    assert [x * q.ki for x in orig.internal.to_list()] == new.internal.to_list()


def test_serialisation_roundtrip(fib):
    data = json.loads(json.dumps(scheme_to_dict(fib)))
    s = scheme_from_dict(data)
    assert s == fib
    with pytest.raises(SchemeError):
        scheme_from_dict({**data, "window": [0.5, 1]})


def test_count_large_T(fib):
    n = count_points(fib, 0, 10 ** 4)
    assert abs(n / 10 ** 4 - float(density(fib))) <= 2 / 10 ** 4

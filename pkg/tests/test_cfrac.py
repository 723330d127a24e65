from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from wcps.cfrac import (
    cf_bounded_quotients,
    cf_convergents,
    cf_expand,
    cf_value,
    format_cf,
    gl_condition,
    gl_majorant,
    parse_cf,
)
from wcps.exactnum import QuadNum, parse_quad


def brute_cf(x: QuadNum, n: int):
    # oracle: the textbook recursion on big floats, precision scaled with n
    with mpmath.workprec(64 * n + 256):
        v = mpmath.mpf(x.a.numerator) / x.a.denominator + \
            mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)
        out = []
        for _ in range(n):
            a = int(mpmath.floor(v))
            out.append(a)
            v = 1 / (v - a)
        return out


@pytest.mark.parametrize("text,expected", [
    ("1/2+1/2*sqrt(5)", "[1;(1)]"),
    ("sqrt(2)", "[1;(2)]"),
    ("1+sqrt(2)", "[2;(2)]"),
    ("1/4+1/4*sqrt(5)", "[0; 1, (4)]"),
])
def test_expansions(text, expected):
    cf = cf_expand(parse_quad(text))
    assert format_cf(cf) == expected
    assert cf_value(cf) == parse_quad(text)
    assert parse_cf(expected) == cf


def test_rational_rejected():
    with pytest.raises(ValueError):
        cf_expand(QuadNum(Fraction(3, 4)))


def test_convergents_tau_sqrt2():
    assert cf_convergents(cf_expand(parse_quad("1/2+1/2*sqrt(5)")), 5).q == [1, 1, 2, 3, 5, 8]
    assert cf_convergents(cf_expand(parse_quad("sqrt(2)")), 4).q == [1, 2, 5, 12, 29]


def test_bounded_quotients():
    assert cf_bounded_quotients(cf_expand(parse_quad("sqrt(7)"))) == (True, 4)


@st.composite
def surds(draw):
    d = draw(st.sampled_from([2, 3, 5, 6, 7, 10, 11, 13, 19, 23]))
    a = draw(st.fractions(-20, 20, max_denominator=12))
    b = draw(st.fractions(-5, 5, max_denominator=12).filter(lambda v: v != 0))
    return QuadNum(a, b, d)


@given(surds())
def test_expansion_matches_oracle(x):
    cf = cf_expand(x)
    n = min(len(cf.preperiod) + 2 * len(cf.period) + 3, 200)
    assert [cf.quotient(i) for i in range(n)] == brute_cf(x, n)


@given(surds())
def test_value_roundtrip(x):
    assert cf_value(cf_expand(x), x.d) == x


@given(surds())
def test_convergent_determinant(x):
    t = cf_convergents(cf_expand(x), 12)
    p, q = t.p, t.q
    for k in range(1, len(q)):
        assert p[k] * q[k - 1] - p[k - 1] * q[k] == (-1) ** (k - 1)
    # convergents approach x from alternating sides
    v = float(x)
    errs = [abs(p[k] / q[k] - v) for k in range(len(q))]
    assert errs[-1] <= errs[0] + 1e-15


def test_gl_sums_tau():
    cf = cf_expand(parse_quad("1/2+1/2*sqrt(5)"))
    r = gl_condition(cf, 200)
    assert r.sums[0] == 1
    assert r.sums[1] == 3
    assert r.converged and r.stable_at <= 200
    assert all(b >= a for a, b in zip(r.sums, r.sums[1:]))


def test_gl_rigorous_majorant_bounds_sums():
    cf = cf_expand(parse_quad("1/2+1/2*sqrt(5)"))
    r = gl_condition(cf, 400)
    bound = gl_majorant(1, rigorous=True)
    assert max(r.sums) < bound


def test_gl_rigorous_majorant_sqrt2():
    # a_i <= 2 for sqrt 2; q_l >= tau^(l-1) still holds
    cf = cf_expand(parse_quad("sqrt(2)"))
    r = gl_condition(cf, 300)
    assert max(r.sums) < gl_majorant(2, rigorous=True)

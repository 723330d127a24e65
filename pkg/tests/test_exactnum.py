from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcps.exactnum import (
    FieldMismatchError,
    QuadNum,
    QVec,
    format_quad,
    parse_quad,
    qn_arith,
    qn_floor,
    qn_to_float,
    qn_to_mpf,
    squarefree_decompose,
)

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=60)
fields = st.sampled_from([2, 3, 5, 7, 13])


@st.composite
def quads(draw, d=None):
    return QuadNum(draw(fracs), draw(fracs), d if d is not None else draw(fields))


def oracle(x: QuadNum, prec=400):
    # independent evaluation: big-float a + b*sqrt(d)
    with mpmath.workprec(prec):
        return mpmath.mpf(x.a.numerator) / x.a.denominator + \
            mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)


def test_tau_square():
    t = parse_quad("1/2+1/2*sqrt(5)")
    assert format_quad(t * t) == "3/2+1/2*sqrt(5)"
    assert t * t == t + 1


def test_norm_product():
    x = QuadNum(1, 1, 5)
    assert x * x.conjugate() == QuadNum(-4)


def test_floor_examples():
    assert qn_floor(parse_quad("1/2+1/2*sqrt(5)")) == 1
    assert qn_floor(parse_quad("1/2-1/2*sqrt(5)")) == -1
    assert qn_floor(parse_quad("sqrt(10)")) == 3


def test_float_tau():
    assert float(parse_quad("1/2+1/2*sqrt(5)")) == 1.618033988749895


def test_parse_forms():
    assert parse_quad("sqrt(8)") == QuadNum(0, 2, 2)
    assert parse_quad("3/4") == QuadNum(Fraction(3, 4))
    assert parse_quad("1 - sqrt(5)/2") == QuadNum(1, Fraction(-1, 2), 5)
    with pytest.raises(ValueError):
        parse_quad("1+x")
    with pytest.raises(FieldMismatchError):
        parse_quad("sqrt(2)+sqrt(3)")


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        QuadNum(0, 1, 2) + QuadNum(0, 1, 3)
    # plain rationals combine with anything
    assert (QuadNum(1) + QuadNum(0, 1, 3)).d == 3


def test_squarefree():
    assert squarefree_decompose(12) == (2, 3)
    assert squarefree_decompose(49) == (7, 1)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QuadNum(1, 1, 5) / QuadNum(0, 0, 5)


@given(quads(), st.integers(0, 3))
def test_field_axioms(x, k):
    y = QuadNum(Fraction(k, 3), Fraction(1, k + 1), x.d)
    assert (x + y) - y == x
    assert x * (y + 1) == x * y + x
    if x != 0:
        assert (x / x) == 1
    assert qn_arith(x, y, "mul") == y * x


@given(quads())
def test_sign_and_floor_match_oracle(x):
    v = oracle(x)
    assert x.sign() == (0 if v == 0 else (1 if v > 0 else -1))
    assert qn_floor(x) == int(mpmath.floor(v))
    assert x.__ceil__() == int(mpmath.ceil(v))


@given(quads())
def test_float_correctly_rounded(x):
    f, err = qn_to_float(x)
    with mpmath.workprec(400):
        ref = float(oracle(x))
    assert f == ref
    assert err >= 0


@given(quads())
def test_mpf_matches_oracle(x):
    with mpmath.workprec(256):
        assert abs(qn_to_mpf(x, 256) - oracle(x)) <= mpmath.mpf(2) ** -240 * (1 + abs(oracle(x)))


@given(quads())
def test_format_parse_roundtrip(x):
    assert parse_quad(format_quad(x), x.d) == x


@given(quads(d=5), quads(d=5))
def test_ordering_consistent(x, y):
    assert (x < y) == (oracle(x) < oracle(y))
    assert (x == y) == (x - y == 0)
    if x == y:
        assert hash(x) == hash(y)


@given(st.lists(quads(d=5), min_size=1, max_size=20), quads(d=5))
def test_qvec_matches_scalars(vals, c):
    v = QVec.from_quads(vals, 5)
    assert v.to_list() == vals
    assert (v * c).to_list() == [x * c for x in vals]
    assert (v + c).to_list() == [x + c for x in vals]
    assert (v * v).to_list() == [x * x for x in vals]
    assert list(v.sign()) == [x.sign() for x in vals]
    cs = v.cumsum().to_list()
    acc = QuadNum(0)
    for x, y in zip(vals, cs):
        acc = acc + x
        assert acc == y


@given(st.lists(quads(d=5), min_size=1, max_size=20))
def test_qvec_float_close(vals):
    v = QVec.from_quads(vals, 5)
    f = v.to_float()
    ref = np.array([float(x) for x in vals])
    assert np.allclose(f, ref, rtol=1e-12, atol=1e-300)


def test_qvec_float_cancellation():
    # (-1/tau)^60 has Fibonacci-sized coefficients that cancel almost completely
    x = QuadNum(1, 0, 5)
    phi_bar = QuadNum(Fraction(1, 2), Fraction(-1, 2), 5)
    for _ in range(60):
        x = x * phi_bar
    v = QVec.from_quads([x], 5)
    assert abs(v.to_float()[0] - float(x)) <= 1e-12 * abs(float(x))

import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcps.exactnum import QuadNum, QVec, parse_quad
from wcps.weights import (
    Indicator,
    WeightError,
    compose_affine,
    make_c2_dome,
    make_cosine_arc,
    make_hat,
    weight_from_dict,
    weight_to_dict,
)

TAU = parse_quad("1/2+1/2*sqrt(5)")


def test_hat_values_and_integral():
    h = make_hat((0, TAU), TAU / 2, 1)
    assert h(TAU / 2) == 1 and h(0) == 0 and h(TAU) == 0
    assert h(TAU / 4) == QuadNum(Fraction(1, 2))
    # triangle of base tau and height 1
    assert h.integral() == TAU / 2


def test_dome_exact_integral_and_bounds():
    h = make_c2_dome((-1, 1), 1)
    assert h.integral() == Fraction(16, 15)
    assert h.sup_h2() == 8
    with mpmath.workprec(128):
        assert abs(h.integral_quadrature(128) - mpmath.mpf(16) / 15) < mpmath.mpf(10) ** -30


@given(st.fractions(Fraction(-49, 50), 1, max_denominator=50), st.sampled_from([1, 2, 3]))
def test_dome_derivatives_match_numeric(z, k):
    h = make_c2_dome((-1, TAU), 2)
    with mpmath.workprec(200):
        # explicit step: the default one is below what eval_mp resolves at 400 bits
        ref = mpmath.diff(lambda x: h.eval_mp(x, 400), mpmath.mpf(z.numerator) / z.denominator, k,
                          h=mpmath.mpf(2) ** -40)
        assert abs(float(h.derivative(QuadNum(z), k)) - float(ref)) < 1e-9


def test_dome_sup_h2_attained():
    h = make_c2_dome((0, 2), 3)
    zs = np.linspace(0, 2, 4001)
    num = max(abs(float(h.derivative(QuadNum(Fraction(z).limit_denominator(10 ** 6)), 2))) for z in zs)
    assert abs(num - float(h.sup_h2())) < 1e-6 * float(h.sup_h2())


@pytest.mark.parametrize("h", [
    make_hat((-1 / TAU, 1), 0, 1),
    make_hat((0, 3), 1, TAU),
    make_c2_dome((-1 / TAU, 1), 1),
])
def test_integral_against_quadrature(h):
    with mpmath.workprec(256):
        assert abs(h.integral_quadrature() - mpmath.mpf(float(h.integral()))) < 1e-12


def test_cosine_arc_numeric_only():
    h = make_cosine_arc((0, 1), 1)
    assert not h.exact
    with pytest.raises(WeightError):
        h(QuadNum(Fraction(1, 2)))
    assert abs(float(h.integral()) - 0.5) < 1e-30


@given(st.lists(st.fractions(-2, 2, max_denominator=30), min_size=1, max_size=30))
def test_qvec_evaluation_matches_scalar(zs):
    for h in (make_hat((-1 / TAU, 1), 0, 1), make_c2_dome((-1 / TAU, 1), 2),
              Indicator(-1 / TAU, QuadNum(1, 0, 5))):
        q = QVec.from_quads([QuadNum(z, 0, 5) + TAU * z for z in zs], 5)
        assert h.eval_qvec(q).to_list() == [h(x) for x in q.to_list()]


def test_compose_affine():
    h = make_hat((0, 2), 1, 1)
    g = compose_affine(h, 2, 0)  # g(z) = h(2z)
    assert g.support == (QuadNum(0), QuadNum(1))
    assert g(QuadNum(Fraction(1, 2))) == 1
    r = compose_affine(h, -1, 0)  # reflection
    assert r(QuadNum(-1)) == 1 and r.support == (QuadNum(-2), QuadNum(0))


def test_serialisation_roundtrip():
    for h in (make_hat((-1 / TAU, 1), 0, 1), make_c2_dome((0, TAU), 2), Indicator(QuadNum(0), TAU)):
        g = weight_from_dict(json.loads(json.dumps(weight_to_dict(h))), 5)
        assert weight_to_dict(g) == weight_to_dict(h)
    with pytest.raises(WeightError):
        weight_from_dict({"kind": "spline"})


def test_invalid_hat():
    with pytest.raises(WeightError):
        make_hat((0, 1), 2, 1)

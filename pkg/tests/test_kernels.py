import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from wcps import _kernels as K
from wcps.exactnum import parse_quad
from wcps.regions import flow_strip, region_from_weight
from wcps.rotation import float_segments
from wcps.weights import make_hat

TAU = parse_quad("1/2+1/2*sqrt(5)")


@pytest.fixture(scope="module")
def setup():
    P = region_from_weight(make_hat((-1 / TAU, 1), 0, 1), alpha=TAU)
    edges = K.edges_from_rings(P.float_rings())
    s0, s1, u0, u1, iota = float_segments((0, 0), TAU, 3000.0)
    return P, edges, u0, u1, iota


def test_chords_parity(setup):
    _, edges, _, _, iota = setup
    lo_a, hi_a = K.polygon_chords(iota, float(TAU), edges)
    lo_b, hi_b = K.polygon_chords_numpy(iota, float(TAU), edges)
    assert np.allclose(lo_a, lo_b, equal_nan=True, atol=1e-14)
    assert np.allclose(hi_a, hi_b, equal_nan=True, atol=1e-14)


def test_profile_parity(setup):
    P, edges, u0, u1, iota = setup
    lo, hi = K.polygon_chords_numpy(iota, float(TAU), edges)
    lam = float(P.area())
    a = K.segment_profile(u0, u1, lo, hi, lam)
    b = K.segment_profile_numpy(u0, u1, lo, hi, lam)
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-13)


def test_riemann_parity():
    P = flow_strip(TAU - 1, Fraction(1, 4))
    edges = K.edges_from_rings(P.float_rings())
    n = 200_000
    assert K.riemann_inside_count(0.1, 0.2, float(TAU) - 1, 1e-4, n, edges) == \
        K.riemann_inside_count_numpy(0.1, 0.2, float(TAU) - 1, 1e-4, n, edges)


def test_env_flag_forces_numpy():
    env = dict(os.environ, WCPS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from wcps import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"

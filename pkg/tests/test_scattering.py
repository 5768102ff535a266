"""Sphere and cylinder T-matrix elements at imaginary frequency."""

import math

import numpy as np
import pytest

from cascyl.scattering import BoundaryCondition, cylinder_t, sphere_t, sphere_t_log

D = BoundaryCondition.DIRICHLET
N = BoundaryCondition.NEUMANN
P = BoundaryCondition.PERFECT_CONDUCTOR

# I0(1)/K0(1), frozen from a 40-digit series evaluation
I0_OVER_K0_AT_1 = 3.0071078131292996958


def test_sphere_dirichlet_closed_form():
    # l = 0: T = I_{1/2}/K_{1/2} = (2/pi) sinh(x) e^x
    assert sphere_t(D, 0, 1.0) == pytest.approx(2.0 / math.pi * math.sinh(1.0) * math.e, rel=1e-13)
    x = 0.001
    assert sphere_t(D, 0, x) == pytest.approx(2.0 / math.pi * math.sinh(x) * math.exp(x), rel=1e-13)
    # small-x leading behavior (2/pi) x, approached like 1 + x
    assert sphere_t(D, 0, x) / (2.0 / math.pi * x) == pytest.approx(1.0, abs=2e-3)


def test_sphere_neumann_small_x():
    x = 0.01
    assert sphere_t(N, 0, x) == pytest.approx(-2.0 / (3.0 * math.pi) * x**3, rel=1e-3)
    assert sphere_t(N, 0, x) < 0.0


def test_cylinder_values():
    assert cylinder_t(D, 0, 1.0) == pytest.approx(I0_OVER_K0_AT_1, rel=1e-12)
    # log-type limit is approached as a difference, not a ratio
    y = 0.01
    assert abs(cylinder_t(D, 0, y) + 1.0 / math.log(y)) < 0.01
    # the -y^2/2 limit is approached like 1 + O(y^2 log y): 1.6% at y = 0.1
    assert cylinder_t(N, 0, 0.1) == pytest.approx(-0.1**2 / 2.0, rel=2e-2)
    assert cylinder_t(N, 0, 0.01) == pytest.approx(-0.01**2 / 2.0, rel=1e-3)


def test_cylinder_order_symmetry():
    for n in (1, 3, 10):
        for y in (0.2, 3.0, 40.0):
            assert cylinder_t(D, n, y) == cylinder_t(D, -n, y)
            assert cylinder_t(N, n, y) == cylinder_t(N, -n, y)


def test_sign_patterns():
    for z in np.geomspace(1e-3, 50, 15):
        z = float(z)
        for l in (0, 1, 5):
            assert sphere_t(D, l, z) > 0.0
            assert sphere_t(N, l, z) < 0.0
        for n in (0, 1, 4):
            assert cylinder_t(D, n, z) > 0.0
            assert cylinder_t(N, n, z) < 0.0
        # matching scalar boundary conditions give a positive product
        assert sphere_t(D, 1, z) * cylinder_t(D, 2, z) > 0.0
        assert sphere_t(N, 1, z) * cylinder_t(N, 2, z) > 0.0


def test_em_channels():
    for z in (0.05, 1.0, 12.0):
        assert sphere_t(P, 1, z, pol="te") == pytest.approx(sphere_t(D, 1, z), rel=1e-14)
        assert sphere_t(P, 1, z, pol="tm") < 0.0
        assert cylinder_t(P, 2, z, pol="tm") == pytest.approx(cylinder_t(D, 2, z), rel=1e-14)
        assert cylinder_t(P, 2, z, pol="te") == pytest.approx(cylinder_t(N, 2, z), rel=1e-14)
    # TM sphere small-x leading behavior for l = 1
    z = 1e-3
    assert sphere_t(P, 1, z, pol="tm") / (-4.0 / (3.0 * math.pi) * z**3) == pytest.approx(1.0, abs=1e-2)


def test_all_small_z_limits_at_1e3():
    z = 1e-3
    # log-type limits as differences, power laws as ratios
    assert abs(cylinder_t(D, 0, z) + 1.0 / math.log(z)) < 0.01
    assert cylinder_t(N, 0, z) / (-z * z / 2.0) == pytest.approx(1.0, abs=0.01)
    assert cylinder_t(N, 1, z) / (-z * z / 2.0) == pytest.approx(1.0, abs=0.01)
    assert sphere_t(D, 0, z) / (2.0 / math.pi * z) == pytest.approx(1.0, abs=0.01)
    assert sphere_t(D, 1, z) / (2.0 / (3.0 * math.pi) * z**3) == pytest.approx(1.0, abs=0.01)
    assert sphere_t(N, 0, z) / (-2.0 / (3.0 * math.pi) * z**3) == pytest.approx(1.0, abs=0.01)
    assert sphere_t(N, 1, z) / (-1.0 / (3.0 * math.pi) * z**3) == pytest.approx(1.0, abs=0.01)
    assert sphere_t(P, 1, z, pol="tm") / (-4.0 / (3.0 * math.pi) * z**3) == pytest.approx(1.0, abs=0.01)


def test_monotone_limit_approach():
    # each limit is approached monotonically as z decreases
    dev = lambda z: abs(cylinder_t(D, 0, z) + 1.0 / math.log(z))
    assert dev(1e-5) < dev(1e-3) < dev(1e-1)
    for z_lo, z_hi in [(1e-5, 1e-3)]:
        r_lo = abs(sphere_t(D, 0, z_lo) / (2.0 / math.pi * z_lo) - 1.0)
        r_hi = abs(sphere_t(D, 0, z_hi) / (2.0 / math.pi * z_hi) - 1.0)
        assert r_lo < 1e-4 and r_lo < r_hi
        r_lo = abs(cylinder_t(N, 0, z_lo) / (-z_lo**2 / 2.0) - 1.0)
        assert r_lo < 1e-4


def test_log_form_consistency():
    for (bc, l, pol) in [(D, 0, None), (N, 3, None), (P, 2, "te"), (P, 2, "tm")]:
        for x in (0.2, 5.0):
            sign, logmag = sphere_t_log(bc, l, x, pol)
            assert sign * math.exp(logmag) == pytest.approx(sphere_t(bc, l, x, pol), rel=1e-13)


def test_domain_errors():
    with pytest.raises(ValueError):
        sphere_t(D, 0, -1.0)
    with pytest.raises(ValueError):
        sphere_t(P, 0, 1.0, pol="te")
    with pytest.raises(ValueError):
        sphere_t(P, 1, 1.0)           # EM requires a polarization
    with pytest.raises(ValueError):
        sphere_t(D, 1, 1.0, pol="te")  # scalar carries a single channel
    with pytest.raises(ValueError):
        cylinder_t(D, 0, 0.0)
    with pytest.raises(ValueError):
        BoundaryCondition.from_name("mixed")

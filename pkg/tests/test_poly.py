import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capdyn import poly as P
from capdyn.errors import MarkingNotCentered, OrbitOverflow, UnknownFamily

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def marking(draw_pts):
    pts = list(draw_pts)
    return pts + [-sum(pts)]


@given(st.lists(cplx, min_size=1, max_size=4), cplx)
def test_marked_points_are_critical(free, a):
    crit = marking(free)
    f = P.build_from_marking(crit, a)
    assert f.degree == len(crit) + 1
    assert f.coeffs[-1] == 1 and f.coeffs[-2] == 0
    assert f.eval(0) == pytest.approx(a)
    scale = max(1.0, max(abs(c) for c in crit)) ** (f.degree - 1)
    for c in crit:
        assert abs(f.deriv(c)) <= 1e-10 * scale


@given(st.lists(cplx, min_size=1, max_size=3), cplx, cplx)
def test_eval_matches_numpy_polyval(free, a, z):
    # oracle: numpy's own Horner on the integrated derivative polynomial
    crit = marking(free)
    dpoly = np.polynomial.polynomial.polyfromroots(crit) * (len(crit) + 1)
    coeffs = np.polynomial.polynomial.polyint(dpoly)
    coeffs[0] = a
    f = P.build_from_marking(crit, a)
    assert f.eval(z) == pytest.approx(np.polynomial.polynomial.polyval(z, coeffs), abs=1e-9)
    w, dw = f.eval_deriv(z)
    assert dw == pytest.approx(np.polynomial.polynomial.polyval(z, dpoly), abs=1e-9)
    assert w == pytest.approx(f.eval(z), abs=1e-12)


def test_marking_must_be_centered():
    with pytest.raises(MarkingNotCentered):
        P.build_from_marking([1.0, 0.5], 0)


def test_orbit_and_overflow():
    f = P.quadratic(-1)
    assert f.orbit(0, 4) == [0, -1, 0, -1, 0]
    with pytest.raises(OrbitOverflow) as e:
        P.quadratic(1).orbit(3, 50)
    assert len(e.value.orbit) > 3 and abs(e.value.orbit[-1]) > 1e150


def test_compose_power_matches_iteration(rng):
    f = P.build_from_marking([0.3 + 0.1j, -0.3 - 0.1j], 0.2j)
    g = f.compose_power(3)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    for w in z:
        assert g.eval(w) == pytest.approx(f.iterate(w, 3), rel=1e-10)
    assert g.degree == 27


def test_taylor_expansion_reproduces_values():
    f = P.build_from_marking([0.5, -0.2, -0.3], 1 - 1j)
    v = 0.3 + 0.4j
    T = f.taylor(v)
    for h in (0.1, -0.2j, 0.05 + 0.05j):
        assert sum(T[k] * h**k for k in range(len(T))) == pytest.approx(f.eval(v + h), abs=1e-12)
    assert T[1] == pytest.approx(f.deriv(v))


@given(cplx)
def test_s1_relation(c):
    f = P.chart("S1Cubic", c).realization
    assert max(P.family_relation_residuals("S1Cubic", f)) < 1e-9 * (1 + abs(c)) ** 3


@given(st.complex_numbers(min_magnitude=0.3, max_magnitude=1.5, allow_nan=False, allow_infinity=False))
def test_f2_relations(b):
    f = P.chart("F2Quartic", b).realization
    c = f.crit
    # c1 and c2 are both fixed and both critical
    assert abs(f.eval(c[0]) - c[0]) < 1e-7 * (1 + abs(c[0])) ** 4
    assert abs(f.eval(c[1]) - c[1]) < 1e-7 * (1 + abs(c[1])) ** 4


@given(cplx, cplx)
def test_two_parameter_families_fix_first_critical_point(c1, c2):
    for fam in ("AirplaneQuartic", "Peanut2Plus"):
        f = P.chart(fam, (c1, c2)).realization
        assert abs(f.eval(c1) - c1) < 1e-9 * (1 + abs(c1) + abs(c2)) ** 4


def test_f2_boundary_parameter_value():
    b2 = P.f2_boundary_parameter()
    assert b2**3 == pytest.approx((2 + math.sqrt(7)) / 3 ** 1.5)


def test_s1_center_gives_period_two_free_orbit():
    # -c -> -2c -> c at c = i sqrt(3)/2 (entry time 2 into the fixed critical point)
    c = P.s1_capture_center()
    f = P.chart("S1Cubic", c).realization
    assert f.eval(-c) == pytest.approx(-2 * c)
    assert f.eval(-2 * c) == pytest.approx(c)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        P.chart("Nope", 1)


def test_from_coefficients_round_trip():
    f = P.build_from_marking([1 + 1j, -1 - 1j], 0.5)
    g = P.from_coefficients(f.coeffs)
    assert sorted(g.crit, key=lambda z: z.real) == pytest.approx(sorted(f.crit, key=lambda z: z.real))


def test_principal_root_and_cbrt():
    assert P.cbrt(-8.0) == pytest.approx(-2.0)
    assert P.principal_root(-4, 2) == pytest.approx(2j)
    assert P.principal_root(0, 3) == 0
    assert cmath.phase(P.principal_root(1j, 4)) == pytest.approx(math.pi / 8)

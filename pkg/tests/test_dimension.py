import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capdyn import dimension as D
from capdyn import poly as P
from capdyn import rays as R
from capdyn.errors import BracketFailure, DegenerateChord, ScaleRangeTooNarrow

LOG2_LOG3 = math.log(2) / math.log(3)


@pytest.fixture(scope="module")
def basilica():
    return R.boundary_parametrization(P.quadratic(-1).compose_power(2), 0j, 2, 14)


# -- Poincaré exponent ---------------------------------------------------------


@pytest.mark.parametrize("d,depth", [(2, 7), (3, 5), (4, 5)])
def test_monomial_exponent_is_one(d, depth):
    b = R.boundary_parametrization(P.monomial(d), 0j, d, depth)
    for est in ("ratio", "mean"):
        assert D.poincare_exponent(b, estimator=est).value == pytest.approx(1.0, abs=1e-6)


def test_poincare_sum_closed_form_for_monomial():
    # |(z^d)^n'| = d^n on the circle, so P_n(t) = d^n * d^(-n t)
    b = R.boundary_parametrization(P.monomial(3), 0j, 3, 5)
    for t in (0.0, 0.5, 1.7):
        assert D.poincare_terms(b, t, 3) == pytest.approx(27 * 27 ** (-t), rel=1e-10)


def test_log_derivative_sums_match_direct_chain_rule(basilica):
    # oracle: iterate F and multiply derivatives at each preimage directly
    F = basilica.poly
    n = 4
    sums = D.log_derivative_sums(basilica, n)
    k, m = 1, 2
    N = len(basilica.points)
    for j in (0, 3, 15):
        y = basilica.points[((k + j * 4) * 2 ** (basilica.depth - m - n)) % N]
        _, dz = F.iterate_deriv(y, n)
        assert sums[j] == pytest.approx(math.log(abs(dz)), abs=1e-9)


def test_basilica_estimators_agree_across_bases(basilica):
    a = D.poincare_exponent(basilica)
    b = D.poincare_exponent(basilica, base=(3, 3))
    assert 1.0 < a.value < 1.3
    assert abs(a.value - b.value) < 1e-3
    mean = D.poincare_exponent(basilica, estimator="mean")
    # the mean estimator approaches from below with O(1/n) bias
    assert mean.value < a.value


def test_bracket_failure(basilica):
    with pytest.raises(BracketFailure):
        D.poincare_exponent(basilica, t_bracket=(1.5, 2.0))


def test_csv_diagnostics(basilica):
    text = D.poincare_exponent(basilica).to_csv()
    assert text.splitlines()[0] == "n,t_n,log_P_n_at_t_n"
    assert len(text.splitlines()) > 3


# -- box counting ---------------------------------------------------------------


def test_box_counting_circle_and_segment():
    th = np.linspace(0, 1, 20000, endpoint=False)
    assert D.box_counting(np.exp(2j * np.pi * th)).value == pytest.approx(1.0, abs=0.02)
    # N(eps) ~ L/eps + c on a segment; start well below the diameter
    seg = np.linspace(0, 1, 20000) * (1 + 1j)
    assert D.box_counting(seg, scale_range=(0.02, 2e-4)).value == pytest.approx(1.0, abs=0.02)


def test_box_counting_cantor():
    pts = D.cantor_intervals(12).astype(complex)
    est = D.box_counting(pts)
    assert est.value == pytest.approx(LOG2_LOG3, abs=0.02)


def test_box_counting_filled_square():
    g = np.linspace(0, 1, 400)
    pts = (g[:, None] + 1j * g[None, :]).ravel()
    assert D.box_counting(pts, scale_range=(0.05, 0.005)).value == pytest.approx(2.0, abs=0.06)


def test_box_counting_singleton_and_narrow():
    assert D.box_counting(np.array([0.3 + 0.1j])).value == 0
    with pytest.raises(ScaleRangeTooNarrow):
        D.box_counting(np.linspace(0, 1, 100).astype(complex), scale_range=(0.1, 0.05))


def test_box_counts_monotone():
    th = np.linspace(0, 1, 5000, endpoint=False)
    z = np.exp(2j * np.pi * th)
    counts = [D.box_counts(z, e) for e in (0.5, 0.1, 0.02)]
    assert counts[0] < counts[1] < counts[2]


# -- turning ---------------------------------------------------------------------


def test_turning_circle_is_one():
    z = np.exp(2j * np.pi * np.arange(256) / 256)
    assert D.turning_max(z) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**31), st.integers(16, 40))
def test_turning_matches_bruteforce(seed, n):
    rng = np.random.default_rng(seed)
    th = np.sort(rng.random(n))
    z = np.exp(2j * np.pi * th) * (1 + 0.4 * rng.random(n))
    assert D.turning_max(z) == pytest.approx(D.turning_bruteforce(z), rel=1e-12)


def test_turning_square_matches_bruteforce():
    corners = [(0, 1), (1, 1 + 1j), (1 + 1j, 1j), (1j, 0)]
    sq = np.concatenate([np.linspace(a, b, 8, endpoint=False) for a, b in corners])
    assert D.turning_max(sq) == pytest.approx(D.turning_bruteforce(sq))


def test_turning_grows_near_a_cusp():
    t = np.linspace(-1, 1, 200, endpoint=False)
    smooth = np.exp(1j * np.pi * t)
    pinched = smooth * (1 - 0.95 * np.exp(-((t - 0) ** 2) * 400))
    assert D.turning_max(pinched) > 3 * D.turning_max(smooth)


def test_turning_degenerate():
    z = np.exp(2j * np.pi * np.arange(20) / 20)
    z[3] = z[2]
    with pytest.raises(DegenerateChord):
        D.turning_max(z)


# -- Mori and transfer ------------------------------------------------------------


@pytest.mark.parametrize("K", [2.0, 3.0])
def test_mori_check(K):
    m = D.mori_check(K)
    assert not m.violations and not m.inverse_violations and not m.universal_violations
    assert m.radial_exponent == pytest.approx(K, abs=0.05)
    assert 0 < m.C1 <= m.C2


@given(st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False))
def test_mori_inverse(z):
    assert D.mori_inverse(D.mori_map(z, 2.0), 2.0) == pytest.approx(z, abs=1e-12)


@given(st.floats(0, 1))
def test_cantor_member_agrees_with_intervals(y):
    # oracle: explicit stage intervals
    depth = 8
    left = D.cantor_intervals(depth)
    inside = bool(np.any((left <= y) & (y <= left + 3.0**-depth)))
    assert bool(D.cantor_member(y, depth)) == inside


def test_cantor_endpoints():
    assert D.cantor_member(np.array([0.0, 1 / 3, 2 / 3, 1.0]), 10).all()
    assert not D.cantor_member(0.5, 1)


def test_transfer_demo():
    r = D.transfer_demo(cantor_depth=12, deltas=(0.1,))[0]
    assert r.estimate.value == pytest.approx(LOG2_LOG3, abs=0.03)
    s = D.transfer_demo(cantor_depth=12, base_set="singleton")[0]
    assert s.estimate.value == 0

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capdyn import scheme as M
from capdyn.errors import IndexOutOfScheme, InvalidScheme, StepTooLarge

W1, W2, TWO_PLUS = M.SCHEME_W1, M.SCHEME_W2, M.SCHEME_2PLUS
CHAIN = M.parse_scheme("p p 2\nu p 3\nw u 3\nq w 2\n")
ALL = [W1, W2, TWO_PLUS, CHAIN]

seeds = st.integers(0, 2**32 - 1)


def point(scheme, seed, scale=2.0):
    return M.random_point(scheme, np.random.default_rng(seed), scale)


# -- scheme combinatorics ----------------------------------------------------


def test_derived_sets_and_weights():
    assert W2.periodic == {"0"}
    assert W2.entry_time("2") == 2 and W2.entry_time("0") == 0
    assert W2.weight("2") == pytest.approx(0.25)
    assert TWO_PLUS.dimension == 2
    for s in ALL:
        for v in s.nonperiodic:
            assert s.weight(v) * s.delta[v] == pytest.approx(s.weight(s.sigma[v]))


def test_invalid_schemes():
    with pytest.raises(InvalidScheme):
        M.parse_scheme("a a 1\n")  # cycle of degree 1
    with pytest.raises(InvalidScheme):
        M.parse_scheme("a b 2\n")  # sigma leaves the vertex set
    with pytest.raises(InvalidScheme):
        M.parse_scheme("a a 2 extra\n")


def test_parse_format_round_trip():
    s = M.parse_scheme(M.format_scheme(CHAIN))
    assert s == CHAIN
    assert M.parse_scheme("# comment\n\nv0 v0 2\nv1 v0 3  # trailing\n") == W1


# -- W and the examples ----------------------------------------------------


def test_w_chain_examples():
    x = M.from_coords(W1, [1, 0])
    assert M.w_chain(x, "v1", 1, 1) == pytest.approx(-2)
    assert M.w_chain(x, "v1", 1, 0) == x.crit("v1", 1)
    assert M.big_m(x) == pytest.approx(2)
    a1, a2 = 0.3 - 0.2j, 0.7 + 0.1j
    y = M.from_coords(W2, [a1, a2])
    assert M.w_chain(y, "2", 1, 2) == pytest.approx(a2**2 + a1)
    assert M.w_map(y) == pytest.approx([a1, a2**2 + a1])


@given(seeds)
def test_w1_closed_formula(seed):
    x = point(W1, seed)
    c1, a = x.crit("v1", 1), x.constant["v1"]
    assert M.w_map(x) == pytest.approx([-2 * c1**3 + a, 2 * c1**3 + a], abs=1e-12)


def test_index_out_of_scheme():
    x = M.zero_point(W2)
    with pytest.raises(IndexOutOfScheme):
        M.w_chain(x, "0", 1, 0)
    with pytest.raises(IndexOutOfScheme):
        M.w_chain(x, "1", 1, 2)
    with pytest.raises(IndexOutOfScheme):
        M.w_chain(x, "1", 2, 0)


def test_marking_must_be_centered():
    with pytest.raises(InvalidScheme):
        M.ModelPoint(W1, {"v1": (1.0, 0.5)}, {"v1": 0})


def test_dimension_matches_index_set():
    for s in ALL:
        x = point(s, 0)
        assert len(x.coords()) == s.dimension == len(s.index_set()) == len(M.w_map(x))


# -- scaling, norm and phi ---------------------------------------------------


@pytest.mark.parametrize("scheme", ALL, ids=["W1", "W2", "2plus", "chain"])
@given(seed=seeds, t=st.floats(0.0, 5.0))
def test_scaling_covariance(scheme, seed, t):
    x = point(scheme, seed)
    y = M.scale_lambda(t, x)
    m = M.big_m(x)
    assert abs(M.big_m(y) - t * m) <= 1e-10 * max(t * m, 1e-300)
    assert np.max(np.abs(M.w_map(y) - t * M.w_map(x))) <= 1e-10 * max(t * m, 1e-300)


def test_trivial_scalings():
    x = point(CHAIN, 1)
    assert np.allclose(M.scale_lambda(1.0, x).coords(), x.coords(), rtol=0, atol=0)
    assert M.big_m(M.zero_point(CHAIN)) == 0
    assert M.norm(M.scale_lambda(0.0, x)) == 0


@pytest.mark.parametrize("scheme", ALL, ids=["W1", "W2", "2plus", "chain"])
@given(seed=seeds, scale=st.floats(0.01, 3.0))
def test_phi_round_trip_and_norm(scheme, seed, scale):
    x = point(scheme, seed, scale)
    y = M.phi(x)
    assert abs(M.big_m(y) - M.norm(x)) <= 1e-10 * max(1, M.norm(x))
    assert np.max(np.abs(M.phi_inverse(y).coords() - x.coords())) <= 1e-10
    assert M.in_connectedness_locus(y) == (M.big_m(y) <= 1)


def test_phi_fixed_and_zero():
    x = M.from_coords(W2, [1, 0])
    assert M.w_map(x) == pytest.approx([1, 1])
    assert np.allclose(M.phi(x).coords(), x.coords(), atol=1e-15)
    z = M.zero_point(W1)
    assert M.norm(M.phi(z)) == 0 and M.norm(M.phi_inverse(z)) == 0


def test_phi_injective_on_grid():
    # grid of spacing 1e-3 in a small patch of the unit ball of W2 coordinates
    g = 1e-3 * np.arange(-5, 6)
    pts = [M.from_coords(W2, [0.3 + a, 0.2 + 1j * b]) for a, b in itertools.product(g, g)]
    img = np.array([M.phi(x).coords() for x in pts])
    d = np.abs(img[:, None, :] - img[None, :, :]).max(axis=2)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-6


def test_connectedness_locus_and_faces():
    z = M.zero_point(W1)
    assert M.in_connectedness_locus(z) and M.boundary_faces(z) == []
    x = M.from_coords(W1, [1, 0])
    assert not M.in_connectedness_locus(x)
    y = M.from_coords(W2, [1, 0])
    assert M.in_connectedness_locus(y)
    assert M.boundary_faces(y) == [("1", 1), ("2", 1)]


# -- Jacobian ------------------------------------------------------------------


@given(seeds)
def test_jacobian_w1(seed):
    x = point(W1, seed)
    c1 = x.crit("v1", 1)
    assert abs(M.jacobian_fd(x) + 12 * c1**2) <= 1e-6 * abs(12 * c1**2)
    assert M.jacobian_closed_form(x) == pytest.approx((2 * c1) ** 2)


@given(seeds)
def test_jacobian_w2(seed):
    x = point(W2, seed)
    a2 = x.constant["2"]
    assert abs(M.jacobian_fd(x) - 2 * a2) <= 1e-6 * abs(2 * a2)
    assert M.jacobian_closed_form(x) == pytest.approx(-a2)


@pytest.mark.parametrize("scheme", [TWO_PLUS, CHAIN], ids=["2plus", "chain"])
def test_jacobian_ratio_constant(scheme):
    rng = np.random.default_rng(5)
    r = []
    for _ in range(30):
        x = M.random_point(scheme, rng)
        r.append(M.jacobian_fd(x) / M.jacobian_closed_form(x))
    r = np.array(r)
    assert np.max(np.abs(r - r[0])) <= 1e-5 * abs(r[0])
    assert M.jacobian_constant(scheme) == pytest.approx(r[0], rel=1e-6)


def test_jacobian_degenerates_on_collision():
    x = M.from_coords(W1, [0, 0.4])
    assert M.jacobian_closed_form(x) == 0
    dets = [abs(np.linalg.det(M.jacobian_matrix_fd(x, h))) for h in (1e-2, 1e-3, 1e-4)]
    # central differences of c^3 at c = 0 give h^2, so the determinant shrinks like h^2
    assert dets[0] > dets[1] > dets[2]
    assert dets[2] < 1e-6


def test_step_too_large():
    x = M.from_coords(CHAIN, [0.9, 0.5, -0.7, 0.3, 0.8])
    with pytest.raises(StepTooLarge):
        M.jacobian_fd(x, h=0.5, check=1e-9)


@pytest.mark.parametrize("scheme", ALL, ids=["W1", "W2", "2plus", "chain"])
@given(seed=seeds)
def test_product_zero_set_is_free_relation_set(scheme, seed):
    x = point(scheme, seed)
    rel, _ = M.has_free_critical_relation(x)
    assert not rel and M.jacobian_closed_form(x) != 0
    # force one relation at a vertex with at least two markings or a depth-two chain
    for v, k in scheme.index_set():
        u = scheme.sigma[v]
        if scheme.entry_time(v) >= 2 and scheme.delta[u] >= 2:
            w1 = M.w_chain(x, v, k, 1)
            vec = x.coords()
            # move c_{u,1} onto w^1_{v,k}: rebuild the marking at u
            y = _with_crit(x, u, w1)
            rel, wit = M.has_free_critical_relation(y, 1e-9)
            assert rel and any(t[2] == u for t in wit)
            assert abs(M.jacobian_closed_form(y)) < 1e-9 * max(1, np.max(np.abs(vec))) ** 12
            break


def _with_crit(x, u, target):
    d = x.scheme.delta[u]
    marking = dict(x.marking)
    if d == 2:
        # the only marked point of a quadratic vertex is 0; shift the image instead
        const = dict(x.constant)
        return M.ModelPoint(x.scheme, marking, const) if target == 0 else _shift_constant(x, u, target)
    c = list(marking[u])
    c[0] = target
    c[-1] = -sum(c[:-1])
    marking[u] = tuple(c)
    return M.ModelPoint(x.scheme, marking, dict(x.constant))


def _shift_constant(x, u, target):
    # c_{u,1} = 0 is fixed, so choose the upstream constant that sends w^1 to 0
    s = x.scheme
    v = next(v for v in s.nonperiodic if s.sigma[v] == u)
    const = dict(x.constant)
    const[v] = const[v] - target
    return M.ModelPoint(s, dict(x.marking), const)

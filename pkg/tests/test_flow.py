import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from se2geodesics.flow import (
    Covector,
    ExtremalState,
    Geodesic,
    NotNaturalError,
    casimir,
    exponential_map,
    exponential_map_batch,
    hamiltonian,
    horizontal_field,
    integrate,
    left_translate,
    natural_grid,
    propagate,
    vertical_field,
    vertical_flow,
)
from se2geodesics.group import E13, E23, ROT, GroupElement, bracket, compose, inverse

from conftest import assert_group_close, random_natural
from strategies import natural_covectors

# frame index -> algebra element of the left-invariant field
FRAME = {0: E13, 1: ROT, 2: E23}


def _frame_coords(Z):
    # (a, b, c) -> coefficients on (X1, X2, X3)
    return np.array([Z.a, Z.c, Z.b])


def generic_vertical_field(p):
    """Oracle: h_i' = sum_j u_j h_{[X_j, X_i]} with controls u = (h1, h2, 0)."""
    h = p.as_array()
    u = np.array([h[0], h[1], 0.0])
    out = np.zeros(3)
    for i in range(3):
        for j in range(3):
            out[i] += u[j] * (_frame_coords(bracket(FRAME[j], FRAME[i])) @ h)
    return out


# vertical field


@pytest.mark.parametrize("p", [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)])
def test_vertical_field_vanishes_at_equilibria(p):
    assert np.all(vertical_field(Covector(*p)) == 0)


def test_vertical_field_regression():
    # frozen from the structure-constant oracle
    assert vertical_field(Covector(0.6, 0.8, 1.0)).tolist() == pytest.approx([0.8, -0.6, -0.48], abs=1e-15)
    assert np.allclose(generic_vertical_field(Covector(0.6, 0.8, 1.0)), [0.8, -0.6, -0.48], atol=1e-15)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_vertical_field_matches_structure_constant_oracle(h1, h2, h3):
    p = Covector(h1, h2, h3)
    assert np.allclose(vertical_field(p), generic_vertical_field(p), atol=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_vertical_field_tangent_to_level_sets(h1, h2, h3):
    p = Covector(h1, h2, h3)
    v = vertical_field(p)
    assert abs(h1 * v[0] + h2 * v[1]) <= 1e-12  # dH(v)
    assert abs(h1 * v[0] + h3 * v[2]) <= 1e-12  # dF(v) / 2


# horizontal field


def test_horizontal_field_examples():
    ident = GroupElement.identity()
    assert horizontal_field(ExtremalState(Covector(1, 0, 0), ident)).tolist() == [1, 0, 0]
    assert horizontal_field(ExtremalState(Covector(0, 1, 0), ident)).tolist() == [0, 0, 1]
    v = horizontal_field(ExtremalState(Covector(0.6, 0.8, 0.3), GroupElement(0, 0, math.pi)))
    assert np.allclose(v, [-0.6, 0, 0.8], atol=1e-15)


# covector construction


def test_natural_renormalizes_small_drift():
    p = Covector.natural(0.6 * (1 + 1e-8), 0.8 * (1 + 1e-8), 0.2)
    assert p.is_natural()


@pytest.mark.parametrize("bad", [(0.5, 0.5, 0), (2, 0, 0), (math.nan, 1, 0), (1, 0, math.inf)])
def test_natural_rejects(bad):
    with pytest.raises(NotNaturalError):
        Covector.natural(*bad)


@given(natural_covectors)
def test_hamiltonian_half_on_C(p):
    assert hamiltonian(p) == pytest.approx(0.5, abs=1e-15)


# integrate


def test_straight_line_exact():
    geo = integrate(Covector(1, 0, 0), None, 5.0, 1e-3)
    assert np.max(np.abs(geo.x - geo.t)) <= 1e-12
    assert np.all(geo.y == 0) and np.all(geo.theta == 0)


def test_rotation_exact():
    geo = integrate(Covector(0, 1, 0), None, 5.0, 1e-3)
    assert np.max(np.abs(geo.theta - geo.t)) <= 1e-12
    assert np.all(geo.x == 0) and np.all(geo.y == 0)


def test_time_grid_uniform_and_ends_at_T():
    geo = integrate(Covector(0.6, 0.8, 1.0), None, 1.234, 1e-2)
    assert geo.t[0] == 0.0 and geo.t[-1] == 1.234
    d = np.diff(geo.t)
    assert np.all(d > 0)
    assert np.max(np.abs(d - d[0])) <= 1e-15 * 1.234 * 4
    assert geo.step <= 1e-2


def test_geodesic_arrays_read_only():
    geo = integrate(Covector(0.6, 0.8, 1.0), None, 0.1, 1e-2)
    with pytest.raises(ValueError):
        geo.states[0, 0] = 1.0


def test_geodesic_starts_at_base_point():
    g0 = GroupElement(1.0, -2.0, 0.5)
    geo = integrate(Covector(0.6, 0.8, 1.0), g0, 1.0, 1e-2)
    assert geo.point(0) == g0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(T=0.0),
        dict(T=-1.0),
        dict(T=1.0, step=0.0),
        dict(T=1.0, step=2.0),
        dict(T=5.0, step=0.2),
        dict(T=math.nan),
        dict(T=1.0, step=math.inf),
    ],
)
def test_integrate_rejects(kwargs):
    with pytest.raises(ValueError):
        integrate(Covector(0.6, 0.8, 0.0), None, **kwargs)


def test_integrate_rejects_nonfinite_covector():
    with pytest.raises(ValueError):
        integrate(Covector(math.nan, 0.8, 0.0), None, 1.0)


# regression values confirmed by a DOP853 solve at rtol 1e-13 and by step halving
ENDPOINT_T10 = (4.021903111075247, 3.85876651917326, -0.17024862361568352)
ENDPOINT_T4 = (2.026714211444316, 1.0879789489820146, -1.318911546999295)


def test_endpoint_regression():
    g = integrate(Covector(0.6, 0.8, 1.0), None, 10.0, 1e-3).endpoint
    assert np.allclose(g.as_array(), ENDPOINT_T10, atol=1e-11)


def test_exponential_map_regression():
    g = exponential_map(Covector(0.6, 0.8, 1.0), 4.0)
    assert np.allclose(g.as_array(), ENDPOINT_T4, atol=1e-11)


def test_exponential_map_examples():
    assert_group_close(exponential_map(Covector(1, 0, 0), 3.0), GroupElement(3, 0, 0), 1e-12)
    assert_group_close(exponential_map(Covector(0, -1, 0), 2.0), GroupElement(0, 0, -2), 1e-12)
    assert exponential_map(Covector(0.6, 0.8, 0.1), 0.0) == GroupElement.identity()


def test_exponential_map_preconditions():
    with pytest.raises(NotNaturalError):
        exponential_map(Covector(0.5, 0.5, 0), 1.0)
    with pytest.raises(ValueError):
        exponential_map(Covector(1, 0, 0), -1.0)


def test_exponential_map_batch_matches_single(rng):
    P = np.array([random_natural(rng).as_array() for _ in range(5)])
    batch = exponential_map_batch(P, 2.5)
    for row, g in zip(P, batch):
        assert np.array_equal(exponential_map(Covector(*row), 2.5).as_array(), g)


def test_conservation_budget(rng):
    for _ in range(10):
        p = random_natural(rng, h3_max=4.0)
        geo = integrate(p, None, 20.0, 1e-3)
        H = 0.5 * (geo.h1**2 + geo.h2**2)
        F = geo.h1**2 + geo.h3**2
        assert np.max(np.abs(H - 0.5)) <= 1e-9
        assert np.max(np.abs(F - casimir(p))) <= 1e-9


def test_step_halving_order(rng):
    for _ in range(10):
        p = random_natural(rng, h3_max=2.0)
        e = [integrate(p, None, 5.0, 0.02 / 2**k).states[-1] for k in range(3)]
        ratio = np.linalg.norm(e[0] - e[1]) / np.linalg.norm(e[1] - e[2])
        assert 12.0 <= ratio <= 20.0, (p, ratio)


@given(natural_covectors, st.floats(-3, 3), st.floats(-3, 3), st.floats(-math.pi, math.pi))
def test_left_invariance(p, x, y, th):
    g0 = GroupElement(x, y, th)
    moved = integrate(p, g0, 2.0, 1e-2)
    base = integrate(p, None, 2.0, 1e-2)
    assert np.allclose(moved.states[:, 3:], left_translate(base, g0), atol=1e-10)
    assert np.array_equal(moved.states[:, :3], base.states[:, :3])


def test_propagate_signed_time_round_trip():
    p = Covector(0.6, 0.8, 1.0)
    fwd = propagate(p, GroupElement.identity(), 2.0, 1e-3)
    back = propagate(fwd.p, fwd.g, -2.0, 1e-3)
    assert np.allclose(back.as_array(), [0.6, 0.8, 1.0, 0, 0, 0], atol=1e-10)


# vertical flow


@pytest.mark.parametrize("tau", [-3.0, 0.5, 7.0])
def test_vertical_flow_fixes_equilibrium(tau):
    assert vertical_flow(Covector(1, 0, 0), tau) == Covector(1.0, 0.0, 0.0)


def test_vertical_flow_zero_time_is_identity():
    p = Covector(0.6, 0.8, 1.0)
    assert vertical_flow(p, 0.0) is p


@given(natural_covectors, st.floats(-5, 5))
def test_vertical_flow_reversible(p, tau):
    back = vertical_flow(vertical_flow(p, tau), -tau)
    assert np.allclose(back.as_array(), p.as_array(), atol=1e-9)


@given(natural_covectors, st.floats(0.1, 3))
def test_vertical_flow_matches_full_system(p, tau):
    q = vertical_flow(p, tau)
    full = propagate(p, GroupElement.identity(), tau)
    assert np.allclose(q.as_array(), full.p.as_array(), atol=1e-12)


@given(natural_covectors, st.floats(-5, 5), st.floats(0.0, 5.0))
def test_shift_identity(p, tau, t):
    ident = GroupElement.identity()
    lhs = exponential_map(vertical_flow(p, tau), t)
    rhs = compose(inverse(propagate(p, ident, tau).g), propagate(p, ident, t + tau).g)
    assert_group_close(lhs, rhs, 1e-6)


# csv


def test_csv_round_trip(tmp_path):
    geo = integrate(Covector(0.6, 0.8, 1.0), GroupElement(1, 2, 3), 0.5, 1e-2)
    path = tmp_path / "g.csv"
    text = geo.to_csv(path)
    assert text.splitlines()[0] == "t,x,y,theta,h1,h2,h3"
    back = Geodesic.from_csv(path)
    assert np.array_equal(back.t, geo.t)
    assert np.array_equal(back.states, geo.states)


def test_csv_deterministic():
    a = integrate(Covector(0.6, 0.8, 1.0), None, 0.5, 1e-2).to_csv()
    b = integrate(Covector(0.6, 0.8, 1.0), None, 0.5, 1e-2).to_csv()
    assert a == b


# grid


def test_natural_grid_shape_and_equilibria():
    G = natural_grid(8, 4, 2.0)
    assert G.shape == (32, 3)
    assert np.allclose(G[:, 0] ** 2 + G[:, 1] ** 2, 1.0, atol=1e-15)
    eq = {tuple(r) for r in G if r[2] == 0 and (r[0] == 0 or r[1] == 0)}
    assert eq == {(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)}


def test_natural_grid_rejects_small_counts():
    with pytest.raises(ValueError):
        natural_grid(1, 4, 1.0)

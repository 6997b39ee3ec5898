import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from zonokernel.dynamics import discretize
from zonokernel.models import (
    QUAD_FAN_PAIRS,
    QuadrotorParams,
    double_integrator_continuous,
    double_integrator_system,
    generator_basis,
    half_circle_fan,
    pair_fan,
    quadrant_fan,
    quadrotor_basis,
    quadrotor_error_bounds,
    quadrotor_errors,
    quadrotor_linearized,
    quadrotor_nonlinear_rhs,
    quadrotor_system,
    random_unit,
    rotation_system,
)


def test_rotation_system():
    r = rotation_system()
    assert_allclose(r.A.T @ r.A, np.eye(2), atol=1e-10)
    assert np.linalg.det(r.A) == pytest.approx(1.0, abs=1e-12)
    assert_allclose(r.A, [[np.cos(0.2), -np.sin(0.2)], [np.sin(0.2), np.cos(0.2)]], atol=1e-12)
    assert r.du == 0 and r.V is None
    rd = rotation_system(disturbance=True)
    assert_allclose(rd.V.generators, 0.05 * np.eye(2))


def test_double_integrator():
    d = double_integrator_system()
    assert_allclose(d.B.ravel(), [0.005, 0.1], atol=1e-12)
    assert d.A[1, 0] == 0 and np.all(np.diag(d.A) == 1)
    ref = discretize(double_integrator_continuous(0.1))
    assert_allclose(d.A, ref.A, atol=1e-10)
    assert_allclose(d.B, ref.B, atol=1e-10)


def test_quadrotor_params():
    p = QuadrotorParams()
    assert p.u1_bar == pytest.approx(9.81 / (0.89 / 1.4))
    with pytest.raises(ValueError):
        QuadrotorParams(K=-1.0)


def test_quadrotor_linearized_at_hover():
    p = QuadrotorParams()
    c = quadrotor_linearized(p)
    assert c.A[2, 4] == pytest.approx(p.g)
    assert c.A[3, 4] == 0
    assert c.B[2, 0] == 0 and c.B[3, 0] == pytest.approx(p.K)
    assert_allclose(c.w, 0, atol=1e-12)
    assert_allclose(c.C[[2, 3]], np.eye(2))
    assert np.all(c.C[[0, 1, 4, 5]] == 0)
    assert c.dt == 0.05


@pytest.mark.parametrize("x5_bar", [0.0, 0.1])
def test_quadrotor_linearized_matches_finite_differences(x5_bar):
    p = QuadrotorParams(x5_bar=x5_bar)
    c = quadrotor_linearized(p)
    x0 = np.zeros(6)
    x0[4] = x5_bar
    u0 = np.array([p.u1_bar, x5_bar * p.d0 / p.n0])
    h = 1e-6
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        fd = (quadrotor_nonlinear_rhs(x0 + e, u0, p) - quadrotor_nonlinear_rhs(x0 - e, u0, p)) / (2 * h)
        assert_allclose(fd, c.A[:, j], atol=1e-5)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (quadrotor_nonlinear_rhs(x0, u0 + e, p) - quadrotor_nonlinear_rhs(x0, u0 - e, p)) / (2 * h)
        assert_allclose(fd, c.B[:, k], atol=1e-5)
    # affine part reproduces the translational rows at the linearization point
    f0 = quadrotor_nonlinear_rhs(x0, u0, p)
    lin = c.A @ x0 + c.B @ (u0 - [p.u1_bar, 0.0]) + c.w
    assert_allclose(lin[[2, 3]], f0[[2, 3]], atol=1e-12)


def test_error_bounds_magnitudes():
    b = quadrotor_error_bounds()
    lo3, hi3 = b["x3"]
    lo4, hi4 = b["x4"]
    assert hi3 == pytest.approx(-lo3, rel=1e-9)
    assert hi3 == pytest.approx(0.2760, rel=0.01)
    assert hi4 <= 1e-12 and -lo4 == pytest.approx(0.3668, rel=0.01)
    V = b["V"]
    assert V.n_generators == 2
    assert_allclose(np.diag(V.generators), 1.1 * 0.5 * np.array([hi3 - lo3, hi4 - lo4]))
    assert_allclose(V.center, [0.5 * (lo3 + hi3), 0.5 * (lo4 + hi4)])


def test_error_bounds_zero_ranges():
    p = QuadrotorParams()
    b = quadrotor_error_bounds(p, (0.0, 0.0), (p.u1_bar, p.u1_bar))
    assert_allclose([*b["x3"], *b["x4"]], 0, atol=1e-12)
    with pytest.raises(ValueError):
        quadrotor_error_bounds(p, (0.1, 0.0))
    with pytest.raises(ValueError):
        quadrotor_error_bounds(p, grid_n=1)


@settings(max_examples=25)
@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_error_bounds_monotone(fx, fu):
    p = QuadrotorParams()
    full = quadrotor_error_bounds(p, grid_n=201)
    x5 = (-fx * np.pi / 12, fx * np.pi / 12)
    u1 = (p.u1_bar - 1.5 * fu, p.u1_bar + 1.5 * fu)
    part = quadrotor_error_bounds(p, x5, u1, grid_n=201)
    for k in ("x3", "x4"):
        assert part[k][0] >= full[k][0] - 1e-12 and part[k][1] <= full[k][1] + 1e-12


def test_errors_vanish_at_linearization_point():
    p = QuadrotorParams()
    e3, e4 = quadrotor_errors(p, 0.0, p.u1_bar)
    assert abs(e3) < 1e-12 and abs(e4) < 1e-12


def test_quadrotor_system_shape():
    s = quadrotor_system(grid_n=201)
    assert (s.dx, s.du, s.dv) == (6, 2, 2)
    assert_allclose(s.U.upper, [1.5, np.pi / 12])


def test_bases_unit_norm():
    for G in (half_circle_fan(9), quadrant_fan(8), quadrotor_basis(), random_unit(4, 10, seed=3),
              generator_basis("axes:3+diagonal_pair:3:0:2"), pair_fan(6, (0, 2), 5)):
        assert_allclose(np.linalg.norm(G, axis=0), 1.0, atol=1e-12)


def test_half_circle_fan_angles():
    G = half_circle_fan(9)
    ang = np.arctan2(G[1], G[0])
    assert_allclose(np.diff(ang), np.pi / 9, atol=1e-12)
    assert ang[0] == 0 and ang[-1] < np.pi
    assert_allclose(generator_basis("axes:2"), np.eye(2))


def test_quadrotor_basis():
    G = quadrotor_basis()
    assert G.shape == (6, 48)
    assert_allclose(G[:, :6], np.eye(6))
    assert QUAD_FAN_PAIRS == ((0, 2), (1, 3), (2, 4), (4, 5))
    fan = pair_fan(6, (0, 2), 5)
    # north-west: negative horizontal, positive vertical component
    assert np.all(fan[0] < 0) and np.all(fan[2] > 0)
    assert np.array_equal(generator_basis("quadrotor"), G)


def test_random_unit_deterministic():
    assert np.array_equal(random_unit(3, 5, seed=7), random_unit(3, 5, seed=7))
    assert not np.array_equal(random_unit(3, 5, seed=7), random_unit(3, 5, seed=8))


@pytest.mark.parametrize("spec", ["", "axes", "fan:3", "axes:x", "pair_fan:2:0:0:3", "pair_fan:2:0:5:3",
                                  "half_circle_fan:0", 7])
def test_invalid_specs(spec):
    with pytest.raises(ValueError):
        generator_basis(spec)

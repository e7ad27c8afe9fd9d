import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from scl import rotalg
from scl.curvekit import GeneratorF1, NuK, NuTheta, Reparam, Rotate
from scl.framelift import component_sign, frame_at, lift_curve, snap_endpoint


def rot_y(a):
    return np.array([[np.cos(a), 0.0, -np.sin(a)], [0.0, 1.0, 0.0], [np.sin(a), 0.0, np.cos(a)]])


def rot_x(a):
    return np.array([[1.0, 0.0, 0.0], [0.0, np.cos(a), -np.sin(a)], [0.0, np.sin(a), np.cos(a)]])


def circle_frame_oracle(theta, t):
    """Conjugate of a rotation about e1 by the tilt of the circle."""
    return rot_y(theta) @ rot_x(2 * np.pi * t) @ rot_y(theta).T


def test_frame_at_start_is_identity():
    for th in (0.3, np.pi / 4, 1.2):
        assert np.allclose(frame_at(NuTheta(th), 0.0), np.eye(3), atol=1e-12)


def test_circle_frame_matches_triple_product():
    g = frame_at(NuTheta(np.pi / 4), 0.3)
    assert np.abs(g - circle_frame_oracle(np.pi / 4, 0.3)).max() < 1e-8


@given(st.floats(0.05, 1.5), st.floats(0.0, 1.0))
def test_circle_frame_property(theta, t):
    assert np.abs(frame_at(NuTheta(theta), t) - circle_frame_oracle(theta, t)).max() < 1e-10


def test_frame_rotation_equivariance():
    q = rotalg.pi_project(np.array([1.0, 2.0, 0.0, 2.0]) / 3)
    g = GeneratorF1(1.0, 1.0)
    for t in (0.1, 0.55, 0.9):
        assert np.allclose(frame_at(Rotate(q, g), t), q @ frame_at(g, t), atol=1e-12)


def test_circle_lift_endpoint():
    for th in (0.2, np.pi / 4, 1.2):
        assert np.linalg.norm(component_sign(NuTheta(th)) + rotalg.ONE) < 1e-6


def test_circle_lift_midpoint_is_half_turn_about_the_tilted_axis():
    # at t = 1/2 the frame is the half turn about (cos th, 0, sin th);
    # the continuous lift from 1 reaches +(cos th i + sin th k)
    for th in np.arange(1, 16) * 0.1:
        res = lift_curve(NuTheta(th), ts=np.linspace(0, 1, 1025))
        mid = res.lift[np.searchsorted(res.ts, 0.5)]
        axis = np.array([0.0, np.cos(th), 0.0, np.sin(th)])
        assert np.linalg.norm(mid - axis) < 1e-12
        assert np.allclose(rotalg.pi_project(axis), circle_frame_oracle(th, 0.5), atol=1e-12)


def test_lift_follows_the_exponential_formula_at_the_axis_angle():
    # Gamma~(t) = exp(pi t l) with l the unit tangent axis: rotation by 2 pi t about l
    th = 0.7
    ell = np.array([0.0, np.cos(th), 0.0, np.sin(th)])
    res = lift_curve(NuTheta(th), ts=np.linspace(0, 1, 257))
    expected = rotalg.quat_exp_imaginary(np.pi * res.ts[:, None] * ell)
    assert np.abs(res.lift - expected).max() < 1e-12


@given(st.integers(1, 6), st.floats(0.1, 1.4))
def test_lap_endpoints_multiply(laps, theta):
    z = component_sign(NuTheta(theta, laps=laps))
    assert np.linalg.norm(z - (-1) ** laps * rotalg.ONE) < 1e-9


def test_component_signs():
    assert np.allclose(component_sign(NuK(1)), -rotalg.ONE)
    assert np.allclose(component_sign(NuK(2)), rotalg.ONE)
    assert np.allclose(component_sign(NuK(3)), -rotalg.ONE)
    assert np.allclose(component_sign(NuK(4)), rotalg.ONE)
    assert np.allclose(component_sign(GeneratorF1(1.0, 1.0)), rotalg.ONE)


@st.composite
def monotone_knots(draw):
    """Increasing piecewise-affine maps of [0, 1] onto itself."""
    m = draw(st.integers(1, 4))
    xs = sorted(draw(st.lists(st.floats(0.05, 0.95), min_size=m, max_size=m, unique=True)))
    ys = sorted(draw(st.lists(st.floats(0.05, 0.95), min_size=m, max_size=m, unique=True)))
    return [(0.0, 0.0)] + list(zip(xs, ys)) + [(1.0, 1.0)]


@given(monotone_knots())
def test_lift_endpoint_is_reparametrization_invariant(knots):
    g = GeneratorF1(2.0, 0.8)
    base = lift_curve(g).endpoint
    other = lift_curve(Reparam(g, knots)).endpoint
    assert np.linalg.norm(base - other) < 1e-9


def test_snap_endpoint():
    z = -rotalg.ONE + 1e-8
    assert np.array_equal(snap_endpoint(z, np.eye(3)), -rotalg.ONE)
    far = rotalg.normalize(np.array([0.9, 0.1, 0.0, 0.0]))
    assert np.array_equal(snap_endpoint(far, np.eye(3)), far)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import unit_quaternions
from scl import rotalg
from scl.curvekit import (
    Concat,
    FrameProduct,
    GeneratorF1,
    GeneratorG,
    GeodesicArc,
    NuK,
    NuTheta,
    Rotate,
    Sampled,
    eval2,
    frame_from_jet,
    join,
    power,
    restrict,
)
from scl.errors import JunctionMismatch, OutOfDomain
from scl.geomscan import geodesic_curvature_profile

E1 = np.array([1.0, 0.0, 0.0])
R3 = np.array([[-0.5, -np.sqrt(3) / 2, 0.0], [np.sqrt(3) / 2, -0.5, 0.0], [0.0, 0.0, 1.0]])


def nu_theta_oracle(theta, t):
    """Circle of angular radius theta around the axis (cos theta, 0, sin theta)."""
    axis = np.array([np.cos(theta), 0.0, np.sin(theta)])
    u = E1 - np.cos(theta) * axis
    w = np.cross(axis, u)
    ph = 2 * np.pi * np.asarray(t)[:, None]
    return np.cos(theta) * axis + np.cos(ph) * u + np.sin(ph) * w


def constant_e1():
    z = np.zeros((2, 3))
    return Sampled([E1, E1], z, z)


def test_point_examples():
    assert np.allclose(eval2(NuTheta(np.pi / 4), 0.0).p, E1)
    assert np.allclose(eval2(NuK(2), 0.25).p, [0.0, 0.0, 1.0])
    j = eval2(NuK(1), 0.3)
    assert np.allclose(j.p, nu_theta_oracle(np.pi / 4, [0.3])[0])


@given(st.floats(0.05, np.pi - 0.05), st.floats(0.0, 1.0))
def test_circle_matches_axis_construction(theta, t):
    assert np.allclose(NuTheta(theta)([t]), nu_theta_oracle(theta, [t]), atol=1e-12)


def test_generator_boundary_circles():
    t = np.linspace(0, 1, 257)
    for s1 in (0.0, 0.7, 2.5):
        assert np.abs(GeneratorF1(s1, 0.0)(t) - NuK(4)(t)).max() < 1e-9
        assert np.abs(GeneratorF1(s1, np.pi)(t) - NuK(2)(t)).max() < 1e-9
    assert np.abs(GeneratorF1(0.0, 1.0)(t) - GeneratorF1(2 * np.pi, 1.0)(t)).max() < 1e-8


@given(st.floats(0.0, np.pi))
def test_generator_threefold_symmetry(s):
    t = np.linspace(0.0, 1.0, 32, endpoint=False)
    g = GeneratorG(s)
    f0 = frame_from_jet(*g._jet(t)[:2])
    f1 = frame_from_jet(*g._jet(t + 1.0 / 3.0)[:2])
    assert np.abs(f1 - R3 @ f0).max() < 1e-12


@given(st.floats(0.0, 2 * np.pi), st.floats(0.0, np.pi))
def test_f1_is_based_and_locally_convex(s1, s2):
    c = GeneratorF1(s1, s2)
    p, v, _ = c.jet(0.0)
    assert np.allclose(p[0], E1, atol=1e-12)
    assert abs(v[0][1]) > 0 and np.allclose(v[0][[0, 2]], 0.0, atol=1e-9)
    assert geodesic_curvature_profile(c, 512).locally_convex


def _curves():
    nu = NuK(1)
    g = GeneratorF1(1.0, 2.0)
    q = rotalg.pi_project(np.array([1.0, 2.0, 0.0, 2.0]) / 3)
    return [
        NuTheta(0.7),
        GeneratorG(1.3),
        g,
        GeodesicArc(E1, [0.0, 1.0, 1.0]),
        Concat(nu, g),
        Rotate(q, nu),
        restrict(g, 0.2, 0.9),
        FrameProduct(NuTheta(np.pi / 2), NuTheta(0.4, laps=6)),
    ]


@pytest.mark.parametrize("index", range(8))
@given(t=st.floats(0.05, 0.95))
def test_jet_matches_finite_differences(index, t):
    c = _curves()[index]
    h = 1e-5
    if any(abs(t - b) < 3 * h for b in c.breaks) or abs(t - 0.5) < 3 * h:
        return
    ts = np.array([t - h, t, t + h])
    p, v, a = c.jet(ts)
    scale = 1 + np.abs(a).max()
    assert np.abs((p[2] - p[0]) / (2 * h) - v[1]).max() < 1e-6 * scale
    assert np.abs((v[2] - v[0]) / (2 * h) - a[1]).max() < 2e-4 * scale


def test_concat_examples():
    t = np.linspace(0, 1, 101)
    assert np.abs(Concat(NuK(1), NuK(1))(t) - NuK(2)(t)).max() < 1e-12
    q = np.array([0.0, 0.6, 0.8])
    c = Concat(GeodesicArc(E1, q), GeodesicArc(q, E1))
    assert np.allclose(c([0.5])[0], q)
    g = GeneratorF1(1.0, 2.0)
    cc = Concat(NuK(2), g)
    th = np.linspace(0.5, 1.0, 33)
    assert np.abs(cc(th) - g(2 * th - 1)).max() < 1e-12
    with pytest.raises(JunctionMismatch):
        Concat(GeodesicArc(E1, q), NuK(1))


def test_rotate_examples():
    t = np.linspace(0, 1, 50)
    g = GeneratorF1(1.0, 2.0)
    assert np.abs(Rotate(np.eye(3), g)(t) - g(t)).max() == 0.0
    assert np.allclose(Rotate(rotalg.J, NuTheta(0.5))([0.0])[0], [-1.0, 0.0, 0.0])


@given(unit_quaternions(), st.floats(0.0, 1.0))
def test_rotate_keeps_unit_norm(z, t):
    p = Rotate(z, GeneratorF1(0.4, 1.1))([t])[0]
    assert abs(np.linalg.norm(p) - 1.0) < 1e-12


def test_frame_product_examples():
    t = np.linspace(0, 1, 200)
    g = GeneratorF1(1.0, 1.0)
    assert np.abs(FrameProduct(g, constant_e1())(t) - g(t)).max() < 1e-12
    fp = FrameProduct(NuTheta(np.pi / 2), NuTheta(0.3, laps=40))
    assert np.allclose(fp([0.0])[0], E1)
    assert geodesic_curvature_profile(fp, 4096).dets.min() > 0


def test_domain_and_combinators():
    arc = GeodesicArc(E1, [0.0, 1.0, 0.0])
    with pytest.raises(OutOfDomain):
        arc(1.5)
    assert np.allclose(NuK(1)(1.25), NuK(1)(0.25))
    t = np.linspace(0, 1, 64)
    assert np.abs(power(NuK(1), 3)(t) - NuK(3)(t)).max() < 1e-12
    with pytest.raises(ValueError):
        NuTheta(np.pi)
    j = join([restrict(NuK(1), 0.0, 0.25), restrict(NuK(1), 0.25, 1.0)], [0.0, 0.25, 1.0])
    assert np.abs(j(t) - NuK(1)(t)).max() < 1e-12

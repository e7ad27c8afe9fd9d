import numpy as np
import pytest
from hypothesis import given

from conftest import unit_quaternions
from scl import fixtures as F
from scl import rotalg
from scl.classify import (
    build_convex_curve,
    classify_component,
    convex_component_nonempty,
    g1_eval,
    g1_from_diagnostics,
    in_A,
    in_interior_formula,
    is_flower,
    is_star,
    is_trefoil,
    theta_max,
)
from scl.curvekit import GeneratorF1, NuK, NuTheta
from scl.errors import EndpointMismatch, NotInX1, NotLocallyConvex
from scl.framelift import component_sign
from scl.geomscan import CurveDiagnostics, DoublePoint, is_convex_curve


def test_in_A_examples():
    assert in_A(np.array([1.0, 2.0, 0.0, 2.0]) / 3) == "interior"
    assert in_A(-rotalg.ONE) != "non_member"
    assert in_A(rotalg.ONE) == "non_member"


@given(unit_quaternions())
def test_A_and_minus_A_are_disjoint(z):
    assert in_A(z) == "non_member" or in_A(-z) == "non_member"


@given(unit_quaternions())
def test_interior_formula_implies_convex_curves_exist(z):
    if in_interior_formula(z):
        assert convex_component_nonempty(rotalg.pi_project(z))[0]


def test_convex_component_examples():
    assert convex_component_nonempty(np.eye(3))[0]
    half_turn = np.diag([-1.0, -1.0, 1.0])
    assert not convex_component_nonempty(half_turn)[0]
    assert convex_component_nonempty(rotalg.pi_project(np.array([1.0, 2.0, 0.0, 2.0]) / 3))[0]


def test_convex_curves_reach_their_quaternion():
    rng = np.random.default_rng(11)
    zs = [z for z in rotalg.random_unit_quaternions(400, rng) if in_A(z) == "interior"][:4]
    for z in [np.array([1.0, 2.0, 0.0, 2.0]) / 3] + zs:
        c = build_convex_curve(z)
        assert np.linalg.norm(component_sign(c) - z) < 1e-7
        assert is_convex_curve(c)


@pytest.mark.parametrize(
    "curve, sign, convex",
    [(NuK(1), -1, True), (NuK(3), -1, False), (NuK(2), 1, False), (NuK(4), 1, False), (GeneratorF1(1.0, 1.0), 1, False)],
    ids=["nu", "nu3", "nu2", "nu4", "f1_1_1"],
)
def test_component_table(curve, sign, convex):
    cls = classify_component(curve)
    assert np.array_equal(cls.endpoint_z, sign * rotalg.ONE)
    assert cls.convex == convex
    assert cls.label == ("X_z_c" if convex else "X_z")


def test_classify_rejects_geodesics():
    with pytest.raises(NotLocallyConvex):
        classify_component(NuTheta(np.pi / 2))


def test_parity_of_concatenation():
    from scl.curvekit import Concat

    a = classify_component(Concat(NuK(2), NuK(2)))
    b = classify_component(NuK(4))
    assert np.array_equal(a.endpoint_z, b.endpoint_z) and a.label == b.label


@pytest.mark.parametrize("k", range(4))
def test_star_fixtures(k):
    c = F.star_curve(k)
    assert is_star(c) == (True, k)
    assert not is_trefoil(c)[0]
    assert np.array_equal(component_sign(c), rotalg.ONE)


def test_star_rejections(trefoil_band):
    assert not is_star(GeneratorF1(1.0, 0.2))[0]
    assert not is_star(GeneratorF1(0.0, trefoil_band["center"]))[0]
    assert not is_star(NuK(3))[0]
    assert not is_star(F.rose_cluster())[0]


def test_trefoil_detector(trefoil_band):
    ok, t0, t1, t2 = is_trefoil(GeneratorF1(0.0, trefoil_band["center"]))
    assert ok and 0 <= t0 < t1 < t2 < 1
    assert not is_trefoil(NuK(3))[0]
    assert not is_trefoil(GeneratorF1(0.0, trefoil_band["upper"] + 1e-3))[0]


def test_flowers():
    one, _ = is_flower(F.flower_one(), -rotalg.ONE, 0)
    three, w = is_flower(F.flower_three(), -rotalg.ONE, 1)
    assert one and three
    assert len(w.ts) == 2 and w.thetas[0] < w.thetas[1] < w.theta_M
    four, w4 = is_flower(NuK(4), -rotalg.ONE, 1)
    assert not four and w4.checks["visits"] is False
    with pytest.raises(EndpointMismatch):
        is_flower(NuK(2), -rotalg.ONE, 0)


def test_theta_max_of_minus_one():
    assert np.isclose(theta_max(-rotalg.ONE), np.pi)


def test_g1_poles():
    assert np.array_equal(g1_eval(F.star_curve(2)), [0.0, 0.0, 1.0])
    assert np.array_equal(g1_eval(NuK(2)), [0.0, 0.0, 1.0])
    assert np.array_equal(g1_eval(NuK(4)), [0.0, 0.0, -1.0])
    for gamma in (GeneratorF1(1.0, 1.0), F.star_curve(0)):
        assert np.array_equal(g1_eval(F.graft_x1(gamma)), [0.0, 0.0, -1.0])
    with pytest.raises(NotInX1):
        g1_eval(NuK(1))


def _dp(t0, t1, point):
    return DoublePoint(t0, t1, "transversal", True, np.asarray(point), np.eye(3)[:2])


def test_g1_longitude_at_zero_triple_parameter():
    # visits grouped at 0, 1/3 and 2/3 with coincident images: equator, longitude 0
    p = np.array([1.0, 0.0, 0.0])
    dps = [_dp(0.001, 0.33, p), _dp(0.34, 0.66, p), _dp(0.67, 0.999, p)]
    diag = CurveDiagnostics(0.1, True, dps, [], [], False, False)
    for star in (True, False):
        assert np.allclose(g1_from_diagnostics(diag, star), [1.0, 0.0, 0.0])


def test_g1_is_on_the_equator_at_the_trefoil(trefoil_band):
    v = g1_eval(GeneratorF1(0.0, trefoil_band["center"]))
    assert abs(np.linalg.norm(v) - 1) < 1e-12 and abs(v[2]) < 1e-6

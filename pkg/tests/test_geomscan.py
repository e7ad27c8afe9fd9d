import numpy as np
import pytest
from hypothesis import given, settings

from conftest import unit_quaternions
from scl import fixtures as F
from scl.curvekit import GeneratorF1, NuK, NuTheta, Rotate, restrict
from scl.errors import Degenerate
from scl.geomscan import (
    cone_hull,
    find_double_points,
    geodesic_curvature_profile,
    is_convex_curve,
    is_locally_convex,
    scan,
)
from scl.oracles import brute_force_crossings, match_pairs


def test_local_convexity_examples():
    assert is_locally_convex(NuTheta(np.pi / 4))
    prof = geodesic_curvature_profile(NuTheta(np.pi / 2))
    assert not prof.locally_convex
    assert np.abs(prof.kappa).max() < 1e-9


def test_f1_grid_is_locally_convex():
    for s1 in np.linspace(0, 2 * np.pi, 6):
        for s2 in np.linspace(0, np.pi, 6):
            assert is_locally_convex(GeneratorF1(s1, s2), 1024)


def test_single_circle_has_no_double_points():
    assert find_double_points(NuTheta(0.9)) == []


def test_multiple_circle_is_degenerate():
    with pytest.raises(Degenerate):
        find_double_points(NuK(2))
    d = scan(NuK(3))
    assert d.degenerate and d.laps == 3 and not d.convex


def test_trefoil_diagnostics(trefoil_band):
    d = scan(GeneratorF1(0.0, trefoil_band["center"]))
    assert len(d.double_points) == 3
    assert all(x.kind == "transversal" for x in d.double_points)
    pts = np.array([x.point for x in d.double_points])
    assert np.abs(pts - pts.mean(0)).max() < 1e-5
    assert len(d.triple_points) == 1 and d.triple_points[0].generic
    positive = [a for a in d.arcs if a.sign == "positive"]
    assert len(positive) == 3 and all(a.simple for a in positive)


def test_triple_point_splits_off_the_band(trefoil_band):
    d = scan(GeneratorF1(0.0, trefoil_band["center"] + 0.05))
    assert d.triple_points == [] and len(d.double_points) == 3 and d.generic


def test_rose_cluster_is_not_generic():
    d = scan(F.rose_cluster())
    assert not d.generic
    assert d.triple_points or any(x.kind == "self_tangency" for x in d.double_points)


def test_small_loop_has_one_simple_positive_arc():
    d = scan(F.small_loop())
    assert len(d.double_points) == 1
    assert sum(a.sign == "positive" and a.simple for a in d.arcs) == 1


def test_nonconvex_generic_curves_have_a_simple_arc():
    for name, c in [("star_1", F.star_curve(1)), ("star_2", F.star_curve(2)), ("small", F.small_loop())]:
        d = scan(c)
        assert d.generic and not d.convex, name
        assert any(a.simple for a in d.arcs), name


def test_convexity_examples(trefoil_band):
    assert is_convex_curve(NuTheta(0.5))
    assert not is_convex_curve(NuK(3))
    assert not is_convex_curve(NuK(2))
    hull = cone_hull(NuK(2))
    assert not hull.full_space and hull.boundary_flags.all()
    assert not is_convex_curve(GeneratorF1(0.0, trefoil_band["center"]))
    # a short arc of a small circle is a convex open curve
    assert is_convex_curve(restrict(NuTheta(0.3), 0.0, 0.4))


@settings(max_examples=8)
@given(unit_quaternions())
def test_double_points_are_rotation_invariant(z):
    c = F.star_curve(1)
    a = sorted((d.t0, d.t1) for d in find_double_points(c))
    b = sorted((d.t0, d.t1) for d in find_double_points(Rotate(z, c)))
    assert len(a) == len(b) == 3
    assert np.abs(np.array(a) - np.array(b)).max() < 1e-8


@pytest.mark.parametrize("index", [0, 7, 13])
def test_matches_brute_force_oracle(index):
    c = F.oracle_fixtures()[index]
    found = [(d.t0, d.t1) for d in find_double_points(c)]
    assert match_pairs(found, brute_force_crossings(c), 1e-5)


def test_planar_and_spatial_cone_hulls_agree():
    curves = [NuTheta(0.5), restrict(NuTheta(0.3), 0.0, 0.4), F.small_loop(), F.star_curve(1)]
    curves += [GeneratorF1(1.0, 1.0), restrict(GeneratorF1(0.5, 2.0), 0.0, 0.3)]
    curves += F.oracle_fixtures(count=4)
    for c in curves:
        a = cone_hull(c, 1024)
        b = cone_hull(c, 1024, planar=False)
        assert a.full_space == b.full_space
        if not a.full_space:
            assert np.array_equal(a.boundary_flags, b.boundary_flags)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scl.degree import (
    cell_grid,
    constant_map_values,
    degree_f1_lift,
    degree_g1_f1,
    degree_s2,
    degree_to_s3,
    f1_lift_point,
    f1_lift_values,
    solid_angle,
    sphere_chart,
    wrap_map,
    wrap_map_values,
)


def node_grid(n1, n2):
    return np.arange(n1) * 2 * np.pi / n1, np.arange(n2 + 1) * np.pi / n2


def test_octant_solid_angle():
    e = np.eye(3)
    assert np.isclose(solid_angle(e[0], e[1], e[2]), np.pi / 2)
    assert np.isclose(solid_angle(e[0], e[2], e[1]), -np.pi / 2)


@pytest.mark.parametrize("method", ["quadrature", "simplicial"])
def test_identity_and_antipode(method):
    if method == "quadrature":
        v = sphere_chart(*cell_grid(64, 64))
        ident, anti = degree_s2(v), degree_s2(-v)
    else:
        v = sphere_chart(*node_grid(64, 64))
        ident = degree_s2(node_values=v, method="simplicial")
        anti = degree_s2(node_values=-v, method="simplicial")
    assert ident.rounded == 1 and ident.residual < 1e-2
    assert anti.rounded == -1 and anti.residual < 1e-2


@given(st.integers(-3, 3))
def test_winding_charts_have_their_winding_degree(k):
    s1, s2 = node_grid(96, 48)
    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    v = np.stack([np.sin(S2) * np.cos(k * S1), np.sin(S2) * np.sin(k * S1), np.cos(S2)], -1)
    rep = degree_s2(node_values=v, method="simplicial")
    assert rep.rounded == k and rep.residual < 1e-9


def test_constant_map_has_degree_zero():
    rep = degree_to_s3(constant_map_values, grid=16)
    assert rep.value == 0.0 and rep.rounded == 0


def test_wrap_map_has_degree_one():
    rep = degree_to_s3(wrap_map_values, wrap_map, grid=32)
    assert abs(rep.rounded) == 1 and rep.residual < 0.1
    assert rep.extra["preimage_degree"] == rep.rounded
    assert len(rep.preimages) == 1


def test_equivariant_lift_matches_direct_lift():
    s1, s2, t = cell_grid(6, 5, 8)
    vals = f1_lift_values(s1, s2, t)
    for a, b, c in [(0, 0, 0), (2, 3, 5), (5, 4, 7), (3, 1, 2)]:
        direct = f1_lift_point((s1[a], s2[b], t[c]))
        assert np.linalg.norm(vals[a, b, c] - direct) < 1e-8


def test_f1_lift_values_are_unit():
    vals = f1_lift_values(*cell_grid(6, 4, 6))
    assert np.abs(np.linalg.norm(vals, axis=-1) - 1).max() < 1e-12


def test_f1_lift_degree_on_a_coarse_grid():
    rep = degree_f1_lift(grid=32)
    assert abs(rep.rounded) == 1 and rep.residual < 0.1
    assert rep.extra["methods_agree"]


def test_g1_f1_degree_on_a_coarse_grid():
    rep, slices = degree_g1_f1(grid=64)
    assert abs(rep.rounded) == 1 and rep.residual < 1e-6
    rep2, _ = degree_g1_f1(grid=64, rho_bar=0.025, slices=slices)
    assert rep2.rounded == rep.rounded

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scl import fixtures as F
from scl import rotalg
from scl.classify import in_A
from scl.curvekit import Concat, FrameProduct, GeneratorF1, NuK, NuTheta, restrict
from scl.errors import ConvexityFailed, MissingPetalFamily, NotInA
from scl.framelift import component_sign
from scl.geomscan import is_locally_convex
from scl.surgery import (
    GraftPlan,
    build_f_n,
    factor_convex,
    graft,
    graft_bound,
    margin_eps,
    perturbation_margin,
    plan_n,
    push_loops_to_start,
    transfer_loops,
)


def test_plan_for_a_geodesic():
    plan = graft_bound(NuTheta(np.pi / 2), np.pi / 4)
    assert plan.C >= 1 and plan.eps > 0
    assert plan.n >= 21 and plan.n > 20 * plan.C / plan.eps
    with pytest.raises(ValueError):
        graft_bound(NuTheta(np.pi / 2), np.pi / 2)


@given(st.floats(1.0, 1e3), st.floats(1e-3, 2.0))
def test_plan_is_monotone_in_the_margin(c, eps):
    n = plan_n(c, eps)
    assert n > 20 * c / eps
    assert plan_n(c, 2 * eps) <= n
    assert plan_n(2 * c, eps) >= n


@pytest.mark.parametrize("theta", [0.3, np.pi / 4, 1.2])
def test_margin_is_the_largest_safe_perturbation(theta):
    eps = margin_eps(theta)
    assert perturbation_margin(theta, eps) > 0
    assert perturbation_margin(theta, eps + 2e-4) <= 0


def test_graft_f1_is_convex_and_keeps_the_endpoint():
    g = GeneratorF1(1.0, 1.0)
    plan = graft_bound(g, np.pi / 4)
    out = graft(g, plan)
    assert is_locally_convex(out, 8192)
    assert np.array_equal(component_sign(out), component_sign(g))


def test_graft_of_a_convex_circle_stays_convex():
    c = NuTheta(0.5)
    out = graft(c, graft_bound(c, np.pi / 4))
    assert np.array_equal(component_sign(out), -rotalg.ONE)


def test_too_few_loops_fail():
    # a short arc that turns the wrong way needs many loops at theta = 1.5
    (c, theta), = [(c, th) for name, c, th in F.grafting_corpus() if name == "short_right_arc"]
    plan = graft_bound(c, theta)
    graft(c, plan)
    with pytest.raises(ConvexityFailed):
        graft(c, GraftPlan(plan.theta, int(np.ceil(plan.n / 8)), plan.C, plan.eps))


def test_push_path_on_a_geodesic():
    geo = NuTheta(np.pi / 2)
    plan = graft_bound(geo, np.pi / 4)
    path = push_loops_to_start(geo, plan, steps=9)
    assert path.valid and path.refinements == 0
    inner = NuTheta(plan.theta, laps=2 * plan.n)
    t = np.linspace(0, 1, 1001)
    assert np.abs(path.curves[0](t) - FrameProduct(geo, inner)(t)).max() < 1e-12
    assert np.abs(path.curves[-1](t) - Concat(inner, geo)(t)).max() < 1e-6
    assert path.report["stage_gap"] < 1e-6
    for c in path.curves:
        assert np.linalg.norm(c.jet(t)[1], axis=1).min() > 1e-9


def test_transfer_split_endpoints():
    nu = NuK(1)
    plan = graft_bound(nu, np.pi / 4)
    half = plan.n // 2
    path = transfer_loops(nu, plan, half, plan.n - half, steps=9)
    assert path.valid
    assert path.report["source_gap"] < 1e-6 and path.report["target_gap"] < 1e-6
    with pytest.raises(ValueError):
        transfer_loops(nu, plan, 1, 1)


def test_transfer_shift_ends_with_loops_in_the_first_half():
    nu = NuK(1)
    plan = graft_bound(nu, np.pi / 4)
    path = transfer_loops(nu, plan, plan.n // 2, plan.n - plan.n // 2, form="shift", steps=9)
    assert path.valid
    base = Concat(NuTheta(np.pi / 4, laps=2), nu)
    t = np.linspace(0.5, 1.0, 257)
    assert np.abs(path.curves[-1](t) - base(t)).max() < 1e-9
    assert np.abs(path.curves[0](t[:-1] - 0.5) - base(t[:-1] - 0.5)).max() < 1e-9


def test_factor_examples():
    fs = factor_convex(-rotalg.ONE, 2)
    prod = rotalg.quat_mul(fs[0][0], fs[1][0])
    assert np.linalg.norm(prod + rotalg.ONE) < 1e-7
    for zp, zi, q in fs:
        assert in_A(zp) != "non_member"
        assert np.allclose(zi, -zp) and np.allclose(q, rotalg.pi_project(zi))
    z = np.array([1.0, 2.0, 0.0, 2.0]) / 3
    (only,) = factor_convex(z, 1)
    assert np.linalg.norm(only[0] - z) < 1e-7
    with pytest.raises(NotInA):
        factor_convex(rotalg.ONE, 2)


def test_single_factor_family_is_f1():
    fam = build_f_n(rotalg.ONE, 1)
    t = np.linspace(0, 1, 200)
    for s in [(0.3, 0.4), (2.0, 2.5)]:
        assert np.abs(fam([s])(t) - GeneratorF1(*s)(t)).max() < 1e-12


def test_two_factor_family():
    with pytest.raises(MissingPetalFamily):
        build_f_n(-rotalg.ONE, 2)

    def petals(i, zi):
        # one and a half laps of nu end at -z'_i, which is z_i
        return lambda s1, s2: restrict(NuK(1), 0.0, 1.5)

    fam = build_f_n(-rotalg.ONE, 2, petals)
    c = fam([(0.0, 0.0), (1.0, 1.0)])
    left, right = c.left, c.right
    gap = np.linalg.norm(left._jet(np.array([1.0]))[0] - right._jet(np.array([0.0]))[0])
    assert gap < 1e-8
    assert np.linalg.norm(component_sign(c) + rotalg.ONE) < 1e-7


def test_corpus_plans_are_finite():
    for name, c, theta in F.grafting_corpus()[:3]:
        plan = graft_bound(c, theta)
        assert 21 <= plan.n < 10**4, name

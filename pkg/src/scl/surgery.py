"""Loop grafting, loop pushing homotopies, loop transfer and products of generator families."""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import rotalg
from .classify import build_convex_curve, in_A
from .curvekit import (
    Concat,
    FrameProduct,
    GeneratorF1,
    NuTheta,
    Reparam,
    Rotate,
    frame_derivative_from_jet,
    join,
    restrict,
)
from .errors import (
    ConvexityFailed,
    MissingPetalFamily,
    NotImmersed,
    NotInA,
    NotLocallyConvex,
    ValidityFailed,
)
from .framelift import lift_curve
from .geomscan import geodesic_curvature_profile

log = logging.getLogger(__name__)

C_SAFETY = 1.1
EPS_TOL = 1e-4
CHECK_SAMPLES = 8192
DEFAULT_STEPS = 33
MAX_DOUBLINGS = 3


@dataclass
class GraftPlan:
    theta: float
    n: int
    C: float
    eps: float

    def to_json(self):
        return {"theta": self.theta, "n": self.n, "C": self.C, "eps": self.eps}


@dataclass
class HomotopyPath:
    ss: list
    curves: list
    stages: list
    valid: bool
    plan: GraftPlan
    refinements: int = 0
    report: dict = field(default_factory=dict)

    @property
    def frames_count(self):
        return len(self.curves)

    def to_json(self):
        return {
            "frames_count": self.frames_count,
            "ss": list(self.ss),
            "stages": list(self.stages),
            "valid": self.valid,
            "plan": self.plan.to_json(),
            "refinements": self.refinements,
            "report": self.report,
        }


# ------------------------------------------------------------ grafting bound


def frame_bound(curve, n_samples=4096):
    """Largest sampled operator norm of the first and second frame derivatives."""
    t = np.linspace(0.0, 1.0, n_samples + 1)
    p, v, a = curve.jet(t)
    if np.linalg.norm(v, axis=1).min() <= 1e-9:
        raise NotImmersed("tangent vanishes")
    d1 = frame_derivative_from_jet(p, v, a)
    # second derivative by central differences of the exact first derivative
    h = 1e-5
    tp = np.clip(t + h, 0.0, 1.0)
    tm = np.clip(t - h, 0.0, 1.0)
    dp = frame_derivative_from_jet(*curve.jet(tp))
    dm = frame_derivative_from_jet(*curve.jet(tm))
    d2 = (dp - dm) / (tp - tm)[:, None, None]
    n1 = np.linalg.norm(d1, ord=2, axis=(1, 2)).max()
    n2 = np.linalg.norm(d2, ord=2, axis=(1, 2)).max()
    return float(n1), float(n2)


def _sphere_directions(m=2000):
    k = np.arange(m) + 0.5
    phi = np.arccos(1 - 2 * k / m)
    th = np.pi * (1 + 5**0.5) * k
    return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], 1)


def perturbation_margin(theta, eps):
    """Worst value of det(nu(0), nu'(0) + d1, nu''(0) + d2) over |d1|, |d2| <= eps.

    The minimum over d2 is closed form; d1 runs over a dense set of
    directions on the sphere of radius eps and over a few smaller radii.
    """
    p, v, a = NuTheta(theta)._jet(np.array([0.0]))
    p, v, a = p[0], v[0], a[0]
    dirs = _sphere_directions()
    worst = np.inf
    for r in (eps, 0.5 * eps, 0.0):
        w = np.cross(p, v + r * dirs)
        vals = w @ a - eps * np.linalg.norm(w, axis=1)
        worst = min(worst, float(vals.min()))
    return worst


def margin_eps(theta, tol=EPS_TOL):
    """Largest eps (to ``tol``) keeping the perturbed determinant positive."""
    lo, hi = 0.0, 1.0
    while perturbation_margin(theta, hi) > 0:
        lo, hi = hi, hi * 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if perturbation_margin(theta, mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def graft_bound(curve, theta, n_samples=4096):
    """Number of loops that provably makes the grafted curve locally convex."""
    if not 0.0 < theta < np.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    n1, n2 = frame_bound(curve, n_samples)
    c = max(1.0, C_SAFETY * max(n1, n2))
    eps = margin_eps(theta)
    n = plan_n(c, eps)
    return GraftPlan(theta=float(theta), n=n, C=c, eps=eps)


def plan_n(c, eps):
    return int(np.ceil(20.0 * c / eps)) + 1


def graft(curve, plan, check=True, n_samples=CHECK_SAMPLES):
    """``t -> Gamma(t) nu_theta^{2n}(t)``; checked for local convexity when ``check``."""
    out = FrameProduct(curve, NuTheta(plan.theta, laps=2 * plan.n))
    if check:
        prof = geodesic_curvature_profile(out, n_samples)
        if not prof.locally_convex:
            bad = float(prof.ts[np.argmin(prof.dets)])
            raise ConvexityFailed(f"grafted curve loses convexity near t = {bad:.6f} (n = {plan.n})")
    return out


# ------------------------------------------------------------ homotopies


def loops(theta, count):
    return NuTheta(theta, laps=count)


def push_stage_one(curve, inner, s):
    """Loops of ``inner`` on [0, s/2] followed by the grafted rest of ``curve``."""
    if s <= 0.0:
        return FrameProduct(curve, inner)
    tail = FrameProduct(curve, restrict(inner, s / 2, 1.0))
    if s >= 1.0 - 1e-15:
        return join([restrict(inner, 0.0, 0.5), tail], [0.0, 0.5, 1.0])
    return join([restrict(inner, 0.0, s / 2), tail], [0.0, s / 2, 1.0])


def push_stage_two(curve, inner, s):
    """Loops squeezed into [0, 1/2] while the grafted part shrinks to nothing."""
    m = 1.0 / (2.0 - s)
    head = restrict(inner, 0.0, m)
    if s >= 1.0 - 1e-15:
        return Concat(head, curve)
    mid = FrameProduct(restrict(curve, 0.0, 1.0 - s), restrict(inner, m, 1.0))
    if s <= 0.0:
        return join([head, mid], [0.0, 0.5, 1.0])
    tail = restrict(curve, 1.0 - s, 1.0)
    return join([head, mid, tail], [0.0, 0.5, 1.0 - s / 2, 1.0])


def transfer_stage_reparam(curve, theta, n1, n2, s):
    """Frame product with nu^{2(n1+n2)} reparametrized toward nu^{2 n1} * nu^{2 n2}."""
    mid = (1 - s) * 0.5 + s * n1 / (n1 + n2)
    inner = Reparam(loops(theta, 2 * (n1 + n2)), [(0.0, 0.0), (0.5, mid), (1.0, 1.0)])
    return FrameProduct(curve, inner)


def split_loops(theta, n1, n2):
    """nu^{2 n1} * nu^{2 n2} written as one reparametrized circle."""
    mid = n1 / (n1 + n2)
    return Reparam(loops(theta, 2 * (n1 + n2)), [(0.0, 0.0), (0.5, mid), (1.0, 1.0)])


def shift_stage(base, theta, n2, s):
    """Grafted loops on [(1-s)/2, (2-s)/2] of ``base``, the plain curve elsewhere."""
    a, b = (1 - s) / 2, (2 - s) / 2
    mid = FrameProduct(restrict(base, a, b), loops(theta, 2 * n2))
    pieces, breaks = [], [0.0]
    if a > 0:
        pieces.append(restrict(base, 0.0, a))
        breaks.append(a)
    pieces.append(mid)
    breaks.append(b)
    if b < 1:
        pieces.append(restrict(base, b, 1.0))
        breaks.append(1.0)
    return join(pieces, breaks)


def _check_step(curve, stage_kind, n_samples):
    prof = geodesic_curvature_profile(curve, n_samples)
    speed = np.linalg.norm(curve.jet(prof.ts)[1], axis=1)
    if stage_kind == "convex":
        if not prof.locally_convex:
            i = int(np.argmin(prof.dets))
            return False, float(prof.ts[i]), float(prof.dets[i])
    elif speed.min() <= 1e-9:
        i = int(np.argmin(speed))
        return False, float(prof.ts[i]), float(speed[i])
    return True, None, float(prof.curvature_min)


def _run_path(build, stages, steps, n_samples):
    """Evaluate and validate a two-stage path.  Returns (ss, curves, tags, failure)."""
    ss, curves, tags = [], [], []
    for stage_name, kind in stages:
        for s in np.linspace(0.0, 1.0, steps):
            c = build(stage_name, float(s))
            ok, t_bad, val = _check_step(c, kind, n_samples)
            ss.append(float(s))
            curves.append(c)
            tags.append(stage_name)
            if not ok:
                return ss, curves, tags, (stage_name, float(s), t_bad, val)
    return ss, curves, tags, None


def _samples_for(plan, n_samples):
    # 2n loops need a few dozen samples each to be resolved
    return max(n_samples, 32 * plan.n)


def _max_gap(c1, c2, n=2048):
    t = np.linspace(0.0, 1.0, n + 1)
    return float(np.abs(c1._jet(t)[0] - c2._jet(t)[0]).max())


def _refining(make, plan, steps, raise_on_failure):
    current = plan
    for attempt in range(MAX_DOUBLINGS + 1):
        path = make(current, steps)
        if path.valid:
            path.refinements = attempt
            return path
        log.info("path invalid at n = %d, doubling", current.n)
        if attempt < MAX_DOUBLINGS:
            current = GraftPlan(current.theta, 2 * current.n, current.C, current.eps)
    path.refinements = MAX_DOUBLINGS
    if raise_on_failure:
        f = path.report["failure"]
        raise ValidityFailed(f"{f['stage']} step invalid", f["s"], f["t"])
    return path


def push_loops_to_start(curve, plan, steps=DEFAULT_STEPS, n_samples=CHECK_SAMPLES, raise_on_failure=True):
    """Homotopy from the grafted curve to nu_theta^{2n} * curve.

    The first stage keeps the curve locally convex and is checked for that;
    the second is only required to stay immersed.  On failure the number of
    loops is doubled, at most three times.
    """

    def make(pl, steps):
        inner = loops(pl.theta, 2 * pl.n)

        def build(stage, s):
            return push_stage_one(curve, inner, s) if stage == "H1" else push_stage_two(curve, inner, s)

        ss, curves, tags, failure = _run_path(build, [("H1", "convex"), ("H2", "immersed")], steps, _samples_for(pl, n_samples))
        report = {"stage_checks": {"H1": "locally convex", "H2": "immersion"}}
        if failure is None:
            source = FrameProduct(curve, inner)
            target = Concat(inner, curve)
            report["source_gap"] = _max_gap(curves[0], source)
            report["target_gap"] = _max_gap(curves[-1], target)
            report["stage_gap"] = _max_gap(curves[steps - 1], curves[steps])
        else:
            report["failure"] = dict(zip(("stage", "s", "t", "value"), failure))
        return HomotopyPath(ss, curves, tags, failure is None, pl, report=report)

    return _refining(make, plan, steps, raise_on_failure)


def transfer_loops(curve, plan, n1, n2, form="split", steps=DEFAULT_STEPS, n_samples=CHECK_SAMPLES, raise_on_failure=True):
    """Loop transfer homotopies, every step checked for local convexity.

    ``form="split"``: from Gamma nu^{2(n1+n2)} to nu^{2 n1} * (Gamma nu^{2 n2}),
    first reparametrizing the loops, then pushing the first n1 pairs to the start.

    ``form="shift"``: with base = nu^2 * curve, from loops grafted on the second
    half of base to loops grafted on its first half; only n2 is used.
    """
    if n1 + n2 != plan.n and form == "split":
        raise ValueError("n1 + n2 must equal plan.n")

    def make(pl, steps):
        scale = pl.n / plan.n
        m1 = max(1, int(round(n1 * scale)))
        m2 = max(1, int(round(n2 * scale)))
        report = {"n1": m1, "n2": m2, "form": form}
        if form == "split":
            inner = split_loops(pl.theta, m1, m2)

            def build(stage, s):
                if stage == "reparam":
                    return transfer_stage_reparam(curve, pl.theta, m1, m2, s)
                return push_stage_one(curve, inner, s)

            stages = [("reparam", "convex"), ("push", "convex")]
            ss, curves, tags, failure = _run_path(build, stages, steps, _samples_for(pl, n_samples))
            if failure is None:
                source = FrameProduct(curve, loops(pl.theta, 2 * (m1 + m2)))
                target = Concat(loops(pl.theta, 2 * m1), FrameProduct(curve, loops(pl.theta, 2 * m2)))
                report["source_gap"] = _max_gap(curves[0], source)
                report["target_gap"] = _max_gap(curves[-1], target)
                report["stage_gap"] = _max_gap(curves[steps - 1], curves[steps])
        elif form == "shift":
            base = Concat(NuTheta(np.pi / 4, laps=2), curve)

            def build(stage, s):
                return shift_stage(base, pl.theta, m2, s)

            ss, curves, tags, failure = _run_path(build, [("shift", "convex")], steps, _samples_for(pl, n_samples))
            if failure is None:
                src = join(
                    [restrict(base, 0.0, 0.5), FrameProduct(restrict(base, 0.5, 1.0), loops(pl.theta, 2 * m2))],
                    [0.0, 0.5, 1.0],
                )
                dst = join(
                    [FrameProduct(restrict(base, 0.0, 0.5), loops(pl.theta, 2 * m2)), restrict(base, 0.5, 1.0)],
                    [0.0, 0.5, 1.0],
                )
                report["source_gap"] = _max_gap(curves[0], src)
                report["target_gap"] = _max_gap(curves[-1], dst)
        else:
            raise ValueError(f"unknown transfer form {form!r}")
        if failure is not None:
            report["failure"] = dict(zip(("stage", "s", "t", "value"), failure))
        return HomotopyPath(ss, curves, tags, failure is None, pl, report=report)

    return _refining(make, plan, steps, raise_on_failure)


# ------------------------------------------------------------ products of families


def lift_at(curve, ts, n_samples=1024):
    """Lift of ``curve`` evaluated exactly at the parameters ``ts``."""
    ts = np.asarray(ts, dtype=float)
    grid = np.union1d(np.linspace(0.0, 1.0, n_samples + 1), ts)
    res = lift_curve(curve, ts=grid)
    idx = np.searchsorted(res.ts, ts)
    return res.lift[idx]


def factor_convex(z, n, curve=None):
    """Split z in A into n factors along the lift of a convex curve.

    Returns ``[(z_prime_i, z_i, Q_i)]`` with z_prime_i the lift increments over
    [(i-1)/n, i/n], z_i = -z_prime_i and Q_i = Pi(z_i).
    """
    z = np.asarray(z, dtype=float)
    if in_A(z) == "non_member":
        raise NotInA(f"{np.round(z, 6).tolist()} is not in A")
    if n < 1:
        raise ValueError("n must be positive")
    gamma0 = build_convex_curve(z) if curve is None else curve
    marks = lift_at(gamma0, np.arange(n + 1) / n)
    out = []
    for i in range(1, n + 1):
        zp = rotalg.quat_mul(rotalg.quat_conj(marks[i - 1]), marks[i])
        zi = -zp
        out.append((zp, zi, rotalg.pi_project(zi, check=False)))
    return out


def f1_family(s1, s2):
    return GeneratorF1(s1, s2)


def default_petal(zi):
    """The shipped family for the factor ``zi``: f1 when zi = 1."""
    if np.linalg.norm(zi - rotalg.ONE) < 1e-9:
        return f1_family
    return None


class ProductFamily:
    """``(s_1, ..., s_n) -> f_{z_1}(s_1) * (Q_1 f_{z_2}(s_2)) * ...``"""

    def __init__(self, z, factors, families, check=True, n_samples=4096):
        self.z = z
        self.factors = factors
        self.families = families
        self.check = check
        self.n_samples = n_samples
        rots = [np.eye(3)]
        for _, _, q in factors[:-1]:
            rots.append(rots[-1] @ q)
        self.rotations = rots

    def __call__(self, params):
        if len(params) != len(self.families):
            raise ValueError(f"expected {len(self.families)} parameter pairs")
        parts = []
        for fam, rot, (s1, s2) in zip(self.families, self.rotations, params):
            c = fam(s1, s2)
            parts.append(c if np.allclose(rot, np.eye(3)) else Rotate(rot, c))
        out = parts[-1]
        for c in reversed(parts[:-1]):
            out = Concat(c, out, check_tangent=True)
        if self.check:
            prof = geodesic_curvature_profile(out, self.n_samples)
            if not prof.locally_convex:
                raise NotLocallyConvex(f"assembled curve has curvature {prof.curvature_min:.3e}")
        return out


def build_f_n(z, n, petal_maps=None, check=True):
    """Family over (S^2)^n landing in X_z, for z = (-1)^n z' with z' in A.

    ``petal_maps`` maps the factor index i (0-based) or the factor quaternion
    to a family ``(s1, s2) -> CurveExpr`` with lift endpoint z_i; it may be a
    dict, a callable ``(i, z_i) -> family`` or None.  Factors equal to 1 use
    the generator f1 by default.
    """
    z = np.asarray(z, dtype=float)
    zp = z * (-1) ** n
    factors = factor_convex(zp, n)
    families = []
    for i, (_, zi, _) in enumerate(factors):
        fam = None
        if callable(petal_maps):
            fam = petal_maps(i, zi)
        elif isinstance(petal_maps, dict):
            fam = petal_maps.get(i)
        if fam is None:
            fam = default_petal(zi)
        if fam is None:
            raise MissingPetalFamily(f"no family supplied for factor {i} = {np.round(zi, 6).tolist()}")
        families.append(fam)
    return ProductFamily(z, factors, families, check=check)

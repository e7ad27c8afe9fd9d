"""Discrete invariants: the set A, convex components, stars, trefoils, flowers and g1."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import rotalg
from .curvekit import E1, E2, NuK, NuTheta, Rotate, join, restrict
from .errors import (
    Degenerate,
    EndpointMismatch,
    NotInA,
    NotInX1,
    NotLocallyConvex,
)
from .framelift import component_sign, lift_curve, snap_endpoint
from .geomscan import (
    circle_laps,
    find_double_points,
    geodesic_curvature_profile,
    is_convex_curve,
    scan,
)

AXIS_TOL = 1e-9
POLYGON_TOL = 1e-8
VISIT_TOL = 1e-6
ORDER_TOL = 1e-6
RHO_BAR = 0.05


# ------------------------------------------------------------ the set A


def _angle_at(p, u, w):
    """Signed angle from tangent ``u`` to tangent ``w`` at the point ``p``."""
    return float(np.arctan2(p @ np.cross(u, w), u @ w))


def convex_component_nonempty(q):
    """Whether some convex curve runs from the frame I to the frame ``q``.

    Returns ``(nonempty, report)``; the report names the case and the angles.
    Angles equal to 0 or pi in the generic case are degenerate and count as
    empty, which keeps the verdict equal to the interior inequality of A.
    """
    q = np.asarray(q, dtype=float)
    p = q[:, 0]
    if np.linalg.norm(p - E1) < AXIS_TOL:
        alpha = _angle_at(E1, q[:, 1], E2)
        ok = 0.0 <= alpha < np.pi
        return ok, {"case": "fixed", "alpha": alpha}
    if np.linalg.norm(p + E1) < AXIS_TOL:
        return False, {"case": "antipodal"}
    v0 = p - (p @ E1) * E1
    v0 /= np.linalg.norm(v0)
    length = float(np.arccos(np.clip(p @ E1, -1.0, 1.0)))
    v1 = -np.sin(length) * E1 + np.cos(length) * v0
    a0 = _angle_at(E1, E2, v0)
    a1 = _angle_at(p, v1, q[:, 1])
    ok = 0.0 < a0 < np.pi and 0.0 < a1 < np.pi
    return ok, {"case": "generic", "alpha0": a0, "alpha1": a1, "length": length}


def fixed_axis_member(alpha):
    """The element of A over the rotation by -alpha about e1."""
    return np.array([-np.cos(alpha / 2), np.sin(alpha / 2), 0.0, 0.0])


def in_interior_formula(z):
    a, b, c, d = z
    return b > 0 and d > 0 and b * d > abs(a * c)


def in_A(z):
    """``"interior"``, ``"boundary_member"`` or ``"non_member"``."""
    z = np.asarray(z, dtype=float)
    rotalg.check_unit(z)
    if in_interior_formula(z):
        return "interior"
    q = rotalg.pi_project(z, check=False)
    ok, rep = convex_component_nonempty(q)
    if ok and rep["case"] == "fixed":
        if np.linalg.norm(z - fixed_axis_member(rep["alpha"])) < 1e-9:
            return "boundary_member"
    return "non_member"


# ------------------------------------------------------------ convex curves


def arc_factor(kappa, length):
    """Lift increment of an arc of constant geodesic curvature ``kappa`` and given length."""
    return rotalg.quat_exp_imaginary(np.array([0.0, kappa * length / 2, 0.0, length / 2]))


def arcs_endpoint(arcs):
    z = rotalg.ONE.copy()
    for kappa, length in arcs:
        z = rotalg.quat_mul(z, arc_factor(kappa, length))
    return z


def arcs_curve(arcs):
    """Unit-speed-proportional curve made of circle arcs, starting at the frame I."""
    frame = np.eye(3)
    pieces = []
    total = sum(length for _, length in arcs)
    for kappa, length in arcs:
        theta = float(np.arctan2(1.0, kappa))
        frac = length / (2 * np.pi * np.sin(theta))
        if not 0 < frac < 1:
            raise ValueError("arc longer than its circle")
        piece = restrict(NuTheta(theta), 0.0, frac)
        pieces.append(Rotate(frame, piece))
        frame = frame @ rotalg.pi_project(arc_factor(kappa, length))
    breaks = np.concatenate([[0.0], np.cumsum([length for _, length in arcs]) / total])
    breaks[-1] = 1.0
    return join(pieces, breaks)


def _fit(z, layout, guesses, lower, upper):
    """Fit two curvatures and three lengths so that three arcs lift to ``z``.

    ``layout`` names the curvature ("a" or "b") used by each arc.
    """
    def arcs(x):
        k = {"a": x[0], "b": x[1]}
        return [(k[layout[0]], x[2]), (k[layout[1]], x[3]), (k[layout[2]], x[4])]

    def resid(x):
        w = rotalg.quat_mul(rotalg.quat_conj(z), arcs_endpoint(arcs(x)))
        return np.concatenate([w[1:], [1.0 - w[0]]])

    for g in guesses:
        g = np.clip(g, np.array(lower) * 1.001, np.array(upper) * 0.999)
        sol = least_squares(resid, g, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.linalg.norm(resid(sol.x)) < 1e-12:
            return arcs(sol.x)
    return None


def build_convex_curve(z):
    """A convex curve from the frame I whose lift ends at ``z`` in A.

    ``-1`` gives the circle nu.  Other members are realized by three circle
    arcs whose curvatures and lengths are fitted so that the lift endpoint
    equals ``z``: turn, nearly geodesic stretch, turn in the generic case; and
    leg, turn, leg (a teardrop closing at e1) when the final frame fixes e1.
    Teardrops with a tip angle close to zero (alpha near pi) are out of reach.
    """
    z = rotalg.normalize(np.asarray(z, dtype=float))
    if in_A(z) == "non_member":
        raise NotInA(f"{np.round(z, 6).tolist()} is not in A")
    if np.linalg.norm(z + rotalg.ONE) < 1e-12:
        return NuK(1)
    ok, rep = convex_component_nonempty(rotalg.pi_project(z))
    lower = [1e-6, 1e-6, 1e-9, 1e-9, 1e-9]
    upper = [1e3, 1e3, np.pi, np.pi, np.pi]
    guesses = []
    if rep["case"] == "generic":
        a0, a1, length = rep["alpha0"], rep["alpha1"], rep["length"]
        for kt in (12.0, 4.0, 30.0, 300.0):
            for kf in (0.05, 0.3, 0.003, 1e-4):
                guesses.append(np.array([kt, kf, a0 / kt, length, a1 / kt]))
        arcs = _fit(z, "aba", guesses, lower, upper)
    else:
        alpha = rep["alpha"]
        for ks in (0.05, 0.3, 1.0):
            for kb in (2.0, 5.0, 10.0, 15.0):
                for leg in (0.2, 0.5, 1.0, 1.3):
                    guesses.append(np.array([kb, ks, leg, (2 * np.pi - alpha) / kb, leg]))
        arcs = _fit(z, "bab", guesses, lower, upper)
    if arcs is None:
        raise NotInA(f"could not realize {np.round(z, 6).tolist()} by a convex curve")
    return arcs_curve(arcs)


# ------------------------------------------------------------ components


@dataclass
class ComponentClass:
    endpoint_z: np.ndarray
    convex: bool
    label: str

    def to_json(self):
        return {"endpoint": rotalg.to_json(self.endpoint_z), "convex": self.convex, "label": self.label}


def classify_component(curve, n_samples=4096):
    prof = geodesic_curvature_profile(curve, n_samples)
    if not prof.locally_convex:
        raise NotLocallyConvex(f"minimum normalized curvature {prof.curvature_min:.3e}")
    res = lift_curve(curve, 1024)
    z = snap_endpoint(res.endpoint, res.frames[-1])
    convex = is_convex_curve(curve, min(n_samples, 4096))
    return ComponentClass(endpoint_z=z, convex=convex, label="X_z_c" if convex else "X_z")


# ------------------------------------------------------------ stars


def _diagnostics(curve, diag):
    return scan(curve) if diag is None else diag


def _visit_word(dps):
    """Cyclic sequence of double-point labels in parameter order."""
    visits = []
    for i, d in enumerate(dps):
        visits.append((d.t0, i))
        visits.append((d.t1, i))
    visits.sort()
    return [v[1] for v in visits]


def _polygon_order(points):
    """Order points around their mean direction; None unless strictly convex."""
    m = points.sum(axis=0)
    if np.linalg.norm(m) < 1e-12:
        return None
    m /= np.linalg.norm(m)
    if np.any(points @ m <= 0):
        return None
    u = np.cross(m, E1 if abs(m[0]) < 0.9 else E2)
    u /= np.linalg.norm(u)
    w = np.cross(m, u)
    order = np.argsort(np.arctan2(points @ w, points @ u))
    ring = points[order]
    n = len(ring)
    dets = np.array([np.linalg.det(np.stack([ring[i - 1], ring[(i + 1) % n], ring[i]])) for i in range(n)])
    if np.all(dets > POLYGON_TOL) or np.all(dets < -POLYGON_TOL):
        return order
    return None


def is_star(curve, diag=None):
    """``(True, k)`` when the curve is a star with 2k+1 double points.

    Non-generic curves (triple points, tangencies, multiply covered circles)
    are not stars and give ``(False, None)``.
    """
    d = _diagnostics(curve, diag)
    if d.degenerate or not d.generic:
        return False, None
    dps = d.double_points
    m = len(dps)
    if m % 2 == 0 or any(x.kind != "transversal" for x in dps):
        return False, None
    k = (m - 1) // 2
    word = _visit_word(dps)
    if m == 1:
        return True, 0
    pts = np.array([x.point for x in dps])
    order = _polygon_order(pts)
    if order is None:
        return False, None
    pos = np.empty(m, dtype=int)
    pos[order] = np.arange(m)
    edges = {}
    for a, b in zip(word, word[1:] + word[:1]):
        if a == b:
            return False, None
        gap = (pos[a] - pos[b]) % m
        if gap not in (1, m - 1):
            return False, None
        key = (min(pos[a], pos[b]), max(pos[a], pos[b]))
        edges[key] = edges.get(key, 0) + 1
    if len(edges) != m or any(c != 2 for c in edges.values()):
        return False, None
    return True, k


# ------------------------------------------------------------ trefoils


def closed_piece(curve, a, b):
    """Restriction to [a, b] of a closed curve, where b may exceed 1."""
    if b <= 1.0:
        return restrict(curve, a, b)
    if curve.periodic:
        return restrict(curve, a, b)
    first = restrict(curve, a, 1.0)
    second = restrict(curve, 0.0, b - 1.0)
    w = (1.0 - a) / (b - a)
    return join([first, second], [0.0, w, 1.0])


def is_trefoil(curve, diag=None, n_samples=2048):
    """``(True, t0, t1, t2)`` for a trefoil, else ``(False, None, None, None)``."""
    d = _diagnostics(curve, diag)
    no = (False, None, None, None)
    if d.degenerate or len(d.triple_points) != 1:
        return no
    tp = d.triple_points[0]
    if not tp.generic or len(tp.ts) != 3 or len(d.double_points) != 3:
        return no
    if any(x.kind != "transversal" for x in d.double_points):
        return no
    t0, t1, t2 = tp.ts
    for a, b in ((t0, t1), (t1, t2), (t2, 1.0 + t0)):
        if not is_convex_curve(closed_piece(curve, a, b), n_samples):
            return no
    return True, t0, t1, t2


# ------------------------------------------------------------ flowers


@dataclass
class FlowerWitness:
    k: int
    ts: list
    thetas: list
    theta_M: float
    checks: dict = field(default_factory=dict)

    def to_json(self):
        return {"k": self.k, "ts": self.ts, "thetas": self.thetas, "theta_M": self.theta_M, "checks": self.checks}


def theta_max(z):
    q = rotalg.pi_project(z)
    if np.linalg.norm(q[:, 0] - E1) < AXIS_TOL:
        x = -q[:, 1]
    else:
        x = q[:, 0]
    ang = float(np.arctan2(x[2], x[1]))
    if ang <= -np.pi + 1e-12:
        ang = np.pi
    return ang


def basepoint_visits(curve, n_samples=4096):
    """Parameters in (0, 1) where the curve returns to e1."""
    t = np.linspace(0.0, 1.0, n_samples + 1)
    p = curve._jet(t)[0]
    dist = np.linalg.norm(p - E1, axis=1)
    h = t[1] - t[0]
    out = []
    for i in range(1, n_samples):
        if dist[i] <= dist[i - 1] and dist[i] < dist[i + 1] and dist[i] < 50 * h:
            # Newton on the derivative of |gamma - e1|^2 / 2
            x = t[i]
            for _ in range(50):
                pp, vv, aa = curve._jet(np.array([x]))
                r = pp[0] - E1
                g = r @ vv[0]
                hess = vv[0] @ vv[0] + r @ aa[0]
                step = g / hess if hess > 0 else 0.0
                x = float(np.clip(x - step, t[i - 1], t[i + 1]))
                if abs(step) < 1e-15:
                    break
            if np.linalg.norm(curve._jet(np.array([x]))[0][0] - E1) < VISIT_TOL and 1e-9 < x < 1 - 1e-9:
                if not out or x - out[-1] > VISIT_TOL:
                    out.append(x)
    return out


def is_flower(curve, z, k, n_samples=2048):
    """Flower test with 2k+1 petals for the quaternion ``z``.

    Raises EndpointMismatch unless the lift of the curve ends at (-1)^k z.
    """
    z = np.asarray(z, dtype=float)
    target = z * (-1) ** k
    end = component_sign(curve)
    if np.linalg.norm(end - target) > 1e-6:
        raise EndpointMismatch(f"lift ends at {np.round(end, 6).tolist()}, expected {np.round(target, 6).tolist()}")
    tm = theta_max(z)
    visits = basepoint_visits(curve)
    wit = FlowerWitness(k=k, ts=visits, thetas=[], theta_M=tm)
    if len(visits) != 2 * k:
        wit.checks["visits"] = False
        return False, wit
    wit.checks["visits"] = True
    try:
        dps = find_double_points(curve, 4096)
    except Degenerate:
        wit.checks["double_points"] = False
        return False, wit
    marks = [0.0] + visits + [1.0]

    def on_mark(x):
        return min(abs(x - m) for m in marks) < VISIT_TOL

    wit.checks["double_points"] = all(on_mark(x.t0) and on_mark(x.t1) for x in dps)
    thetas = []
    for i, ti in enumerate(visits, start=1):
        v = curve.jet(ti)[1][0] * (-1) ** i
        thetas.append(float(np.arctan2(v[2], v[1])))
    wit.thetas = thetas
    seq = [0.0] + thetas + [tm]
    wit.checks["angles"] = bool(all(b - a > ORDER_TOL for a, b in zip(seq, seq[1:])))
    petals = True
    for a, b in zip(marks, marks[1:]):
        if not is_convex_curve(restrict(curve, a, b), n_samples):
            petals = False
            break
    wit.checks["petals"] = petals
    return bool(all(wit.checks.values())), wit


# ------------------------------------------------------------ g1


def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def trefoil_proximity(dps):
    """Coalescence data for three transversal double points.

    Returns ``(rho, (t0, t1, t2))`` with ``rho`` the largest distance between
    the three images and ``t0 < t1 < t2`` the parameters grouped into three
    pairs of nearby visits, or None when the pattern does not apply.
    """
    if len(dps) != 3 or any(d.kind != "transversal" for d in dps):
        return None
    pts = np.array([d.point for d in dps])
    rho = max(np.linalg.norm(pts[i] - pts[j]) for i in range(3) for j in range(i + 1, 3))
    ts = sorted([d.t0 for d in dps] + [d.t1 for d in dps])
    # pair the six visits cyclically into three clusters of two; pick the pairing with smallest spread
    best = None
    for off in (0, 1):
        rolled = ts[off:] + [x + 1.0 for x in ts[:off]]
        groups = [(rolled[2 * i], rolled[2 * i + 1]) for i in range(3)]
        spread = max(b - a for a, b in groups)
        if best is None or spread < best[0]:
            best = (spread, groups)
    centers = sorted(float(np.mod(0.5 * (a + b), 1.0)) for a, b in best[1])
    return rho, tuple(centers)


def g1_from_diagnostics(diag, star, rho_bar=RHO_BAR):
    """The value of g1 given the diagnostics and star verdict of a curve in X_1."""
    if diag.degenerate:
        return np.array([0.0, 0.0, 1.0]) if diag.laps == 2 else np.array([0.0, 0.0, -1.0])
    prox = trefoil_proximity(diag.double_points)
    theta = 0.0
    if prox is not None and prox[0] < rho_bar:
        rho, (t0, t1, t2) = prox
        s = float(smoothstep(rho / rho_bar))
        ga = np.pi / 2 - np.pi / 2 * s if star else np.pi / 2 + np.pi / 2 * s
        theta = 2 * np.pi * t0 / (1 + t0 - t2)
    else:
        return np.array([0.0, 0.0, 1.0]) if star else np.array([0.0, 0.0, -1.0])
    return np.array([np.sin(ga) * np.cos(theta), np.sin(ga) * np.sin(theta), np.cos(ga)])


def g1_eval(curve, diag=None, rho_bar=RHO_BAR):
    """Continuous map from X_1 to the sphere: north pole on stars, south pole far from them.

    Near a trefoil, within ``rho_bar`` of the three double points coalescing,
    the polar angle moves smoothly through pi/2 and the longitude is
    2 pi t0 / (1 + t0 - t2) for the grouped triple-point parameters.
    """
    end = component_sign(curve)
    if np.linalg.norm(end - rotalg.ONE) > 1e-6:
        raise NotInX1(f"lift ends at {np.round(end, 6).tolist()}")
    d = _diagnostics(curve, diag)
    star = is_star(curve, d)[0] if not d.degenerate else False
    return g1_from_diagnostics(d, star, rho_bar)


def circle_laps_of(curve, n_samples=4096):
    t = np.linspace(0.0, 1.0, n_samples, endpoint=False)
    return circle_laps(curve._jet(t)[0])


__all__ = [
    "ComponentClass",
    "FlowerWitness",
    "build_convex_curve",
    "classify_component",
    "convex_component_nonempty",
    "fixed_axis_member",
    "g1_eval",
    "in_A",
    "is_flower",
    "is_star",
    "is_trefoil",
    "theta_max",
]

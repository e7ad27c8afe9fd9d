"""Curvature, self-intersections, arcs and convexity of spherical curves."""

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .curvekit import is_closed, restrict
from .errors import Degenerate, NonConvergence, NotImmersed

log = logging.getLogger(__name__)

CONVEX_DET_TOL = 1e-10
REFINE_TOL = 1e-12
ACCEPT_TOL = 1e-7
DEDUP_TOL = 1e-6
TANGENCY_TOL = 1e-6
CURVATURE_GAP_TOL = 1e-6
TRIPLE_CLUSTER_TOL = 3e-6
BOUNDARY_TOL = 1e-7
HEMISPHERE_TOL = 1e-3
CIRCLE_TOL = 1e-7


@dataclass
class CurvatureProfile:
    ts: np.ndarray
    dets: np.ndarray
    kappa: np.ndarray
    curvature_min: float
    locally_convex: bool


@dataclass
class DoublePoint:
    t0: float
    t1: float
    kind: str  # "transversal" or "self_tangency"
    generic: bool
    point: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)  # unit tangents at t0 and t1
    basepoint: bool = False

    def to_json(self):
        return {
            "t0": self.t0,
            "t1": self.t1,
            "kind": self.kind,
            "generic": self.generic,
            "point": self.point.tolist(),
            "basepoint": self.basepoint,
        }


@dataclass
class TriplePoint:
    ts: tuple
    generic: bool
    point: np.ndarray = field(repr=False)

    def to_json(self):
        return {"ts": list(self.ts), "generic": self.generic, "point": self.point.tolist()}


@dataclass
class Arc:
    t_minus: float
    t_plus: float
    sign: str  # "positive" or "negative"
    simple: bool

    def to_json(self):
        return {"t_minus": self.t_minus, "t_plus": self.t_plus, "sign": self.sign, "simple": self.simple}


@dataclass
class ConeHull:
    facets: np.ndarray  # inward unit normals of supporting planes through the origin
    boundary_flags: np.ndarray
    full_space: bool


@dataclass
class CurveDiagnostics:
    curvature_min: float
    locally_convex: bool
    double_points: list
    triple_points: list
    arcs: list
    convex: bool
    generic: bool
    degenerate: bool = False
    laps: int = 0

    def to_json(self):
        return {
            "curvature_min": self.curvature_min,
            "locally_convex": self.locally_convex,
            "double_points": [d.to_json() for d in self.double_points],
            "triple_points": [t.to_json() for t in self.triple_points],
            "arcs": [a.to_json() for a in self.arcs],
            "convex": self.convex,
            "generic": self.generic,
            "degenerate": self.degenerate,
            "counts": {
                "double_points": len(self.double_points),
                "triple_points": len(self.triple_points),
                "tangencies": sum(d.kind == "self_tangency" for d in self.double_points),
                "arcs": len(self.arcs),
                "simple_arcs": sum(a.simple for a in self.arcs),
            },
        }


def _det3(a, b, c):
    return np.einsum("ij,ij->i", np.cross(a, b), c)


def geodesic_curvature_profile(curve, n_samples=4096):
    """det(gamma, gamma', gamma'') and the normalized geodesic curvature on a uniform grid."""
    t = np.linspace(0.0, 1.0, n_samples, endpoint=not curve.periodic)
    p, v, a = curve.jet(t)
    speed = np.linalg.norm(v, axis=1)
    if speed.min() <= 1e-9:
        raise NotImmersed(f"tangent vanishes near t = {t[np.argmin(speed)]:.6f}")
    dets = _det3(p, v, a)
    kappa = dets / speed**3
    return CurvatureProfile(t, dets, kappa, float(kappa.min()), bool(np.all(dets > CONVEX_DET_TOL)))


def is_locally_convex(curve, n_samples=4096):
    return geodesic_curvature_profile(curve, n_samples).locally_convex


# ------------------------------------------------------------ self-intersections


def _grid(curve, n):
    closed = is_closed(curve)
    if closed:
        t = np.arange(n) / n
        nxt = np.roll(np.arange(n), -1)
    else:
        t = np.linspace(0.0, 1.0, n + 1)
        nxt = np.arange(1, n + 1)
    p = curve._jet(t)[0]
    return closed, t, p, nxt


def circle_laps(p):
    """Number of turns if all points lie on one circle, else 0."""
    c = p.mean(axis=0)
    _, sv, vt = np.linalg.svd(p - c, full_matrices=False)
    if sv[2] / np.sqrt(len(p)) > CIRCLE_TOL:
        return 0
    e1, e2 = vt[0], vt[1]
    ang = np.unwrap(np.arctan2((p - c) @ e2, (p - c) @ e1))
    return int(round(abs(ang[-1] - ang[0]) / (2 * np.pi)))


def _chord_params(a, b, x, t0, dt):
    """Parameter of the point ``x`` on the great-circle chord from ``a`` to ``b``."""
    ab = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b))
    ax = np.arctan2(np.linalg.norm(np.cross(a, x), axis=1), np.einsum("ij,ij->i", a, x))
    f = np.where(ab > 0, ax / np.where(ab > 0, ab, 1.0), 0.0)
    return t0 + np.clip(f, 0.0, 1.0) * dt


def chord_crossings(p, nxt, pairs):
    """Filter chord index pairs to those whose great-circle chords cross.

    Returns ``(crossing_pairs, intersection_points, overlap_pairs)``.  The
    half-open sign convention counts a crossing through a shared sample once.
    """
    i, j = pairs[:, 0], pairs[:, 1]
    a, b = p[i], p[nxt[i]]
    c, d = p[j], p[nxt[j]]
    nab = np.cross(a, b)
    ncd = np.cross(c, d)
    s1 = np.einsum("ij,ij->i", nab, c)
    s2 = np.einsum("ij,ij->i", nab, d)
    s3 = np.einsum("ij,ij->i", ncd, a)
    s4 = np.einsum("ij,ij->i", ncd, b)
    near = np.einsum("ij,ij->i", a, c) > 0
    scale = np.linalg.norm(nab, axis=1) * np.linalg.norm(ncd, axis=1)
    flat = (np.abs(s1) < 1e-13) & (np.abs(s2) < 1e-13) & near
    cross = ((s1 >= 0) != (s2 >= 0)) & ((s3 >= 0) != (s4 >= 0)) & near & ~flat
    x = np.cross(nab[cross], ncd[cross])
    nx = np.linalg.norm(x, axis=1)
    ok = nx > 1e-300
    x[ok] /= nx[ok][:, None]
    sgn = np.sign(np.einsum("ij,ij->i", x, a[cross] + b[cross]))
    x *= np.where(sgn == 0, 1.0, sgn)[:, None]
    overlaps = []
    if flat.any():
        # collinear chords on one great circle: keep those whose spans overlap
        for k in np.nonzero(flat)[0]:
            ai, bi, ci, di = a[k], b[k], c[k], d[k]
            u = bi - ai
            lo, hi = sorted([(ci - ai) @ u, (di - ai) @ u])
            if hi > 0 and lo < u @ u and scale[k] >= 0:
                overlaps.append(pairs[k])
    return pairs[cross], x, np.array(overlaps, dtype=int).reshape(-1, 2)


def _refine(curve, closed, u, w, lo_u, hi_u, lo_w, hi_w, iters=60):
    """Batched Gauss-Newton on gamma(u) = gamma(w)."""
    def ev(x):
        return curve._jet(np.mod(x, 1.0) if closed else np.clip(x, 0.0, 1.0))

    for _ in range(iters):
        pu, vu, _ = ev(u)
        pw, vw, _ = ev(w)
        r = pu - pw
        res = np.linalg.norm(r, axis=1)
        act = res > REFINE_TOL
        if not act.any():
            break
        jtj00 = np.einsum("ij,ij->i", vu, vu)
        jtj11 = np.einsum("ij,ij->i", vw, vw)
        jtj01 = -np.einsum("ij,ij->i", vu, vw)
        g0 = np.einsum("ij,ij->i", vu, r)
        g1 = -np.einsum("ij,ij->i", vw, r)
        reg = 1e-14 * (jtj00 + jtj11)
        det = (jtj00 + reg) * (jtj11 + reg) - jtj01**2
        du = -((jtj11 + reg) * g0 - jtj01 * g1) / det
        dw = -(-jtj01 * g0 + (jtj00 + reg) * g1) / det
        u = np.where(act, np.clip(u + du, lo_u, hi_u), u)
        w = np.where(act, np.clip(w + dw, lo_w, hi_w), w)
    pu = ev(u)[0]
    pw = ev(w)[0]
    return u, w, np.linalg.norm(pu - pw, axis=1)


def _cyc(a, b, closed):
    d = abs(a - b)
    return min(d, 1.0 - d) if closed else d


def _make_double_points(curve, closed, u, w):
    if closed:
        u, w = np.mod(u, 1.0), np.mod(w, 1.0)
        u = np.where(u > 1 - 1e-13, 0.0, u)
        w = np.where(w > 1 - 1e-13, 0.0, w)
    t0 = np.minimum(u, w)
    t1 = np.maximum(u, w)
    order = np.lexsort((t1, t0))
    kept = []
    seen = {}
    for k in order:
        if _cyc(t0[k], t1[k], closed) < DEDUP_TOL:
            continue  # the two strands are the same point of the curve
        key = (int(t0[k] / DEDUP_TOL), int(t1[k] / DEDUP_TOL))
        dup = False
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                for (a, b) in seen.get((key[0] + da, key[1] + db), ()):
                    if abs(a - t0[k]) < DEDUP_TOL and abs(b - t1[k]) < DEDUP_TOL:
                        dup = True
        if not dup:
            kept.append((float(t0[k]), float(t1[k])))
            seen.setdefault(key, []).append(kept[-1])
    if not kept:
        return []
    ta = np.array([k[0] for k in kept])
    tb = np.array([k[1] for k in kept])
    pa, va, aa = curve._jet(ta)
    pb, vb, ab = curve._jet(tb)
    sa = np.linalg.norm(va, axis=1)
    sb = np.linalg.norm(vb, axis=1)
    ua, ub = va / sa[:, None], vb / sb[:, None]
    cross = np.linalg.norm(np.cross(ua, ub), axis=1)
    ka = _det3(pa, va, aa) / sa**3
    kb = _det3(pb, vb, ab) / sb**3
    out = []
    for k in range(len(kept)):
        tangency = cross[k] < TANGENCY_TOL
        generic = (abs(ka[k] - kb[k]) > CURVATURE_GAP_TOL) if tangency else True
        out.append(
            DoublePoint(
                t0=kept[k][0],
                t1=kept[k][1],
                kind="self_tangency" if tangency else "transversal",
                generic=bool(generic),
                point=0.5 * (pa[k] + pb[k]),
                tangents=np.stack([ua[k], ub[k]]),
                basepoint=bool(kept[k][0] < 1e-9 or (not closed and kept[k][1] > 1 - 1e-9)),
            )
        )
    return out


def find_double_points(curve, n_samples=4096):
    """Self-intersections ``(t0 < t1)`` of a curve, refined to machine precision.

    Closed curves are treated on [0, 1).  Chords between consecutive samples
    are bucketed with a k-d tree on their midpoints; crossing chord pairs seed
    a Gauss-Newton refinement of gamma(t0) = gamma(t1).
    """
    closed, t, p, nxt = _grid(curve, n_samples)
    speed = np.linalg.norm(curve._jet(t)[1], axis=1)
    if speed.min() <= 1e-9:
        raise NotImmersed("tangent vanishes")
    laps = circle_laps(p)
    if laps > 1:
        raise Degenerate(f"curve is a circle traversed {laps} times")
    nchord = len(t) if closed else len(t) - 1
    mids = p[:nchord] + p[nxt[:nchord]]
    mids /= np.linalg.norm(mids, axis=1)[:, None]
    lens = np.linalg.norm(p[nxt[:nchord]] - p[:nchord], axis=1)
    radius = float(lens.max()) * 1.0001 + 1e-15
    pairs = cKDTree(mids).query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return []
    pairs = np.sort(pairs, axis=1)
    gap = pairs[:, 1] - pairs[:, 0]
    adjacent = gap <= 1
    if closed:
        adjacent |= gap >= nchord - 1
    pairs = pairs[~adjacent]
    if len(pairs) == 0:
        return []
    hits, x, overlaps = chord_crossings(p, nxt, pairs)
    dt = np.diff(np.append(t, 1.0)) if closed else np.diff(t)
    results = []
    if len(hits):
        i, j = hits[:, 0], hits[:, 1]
        u0 = _chord_params(p[i], p[nxt[i]], x, t[i], dt[i])
        w0 = _chord_params(p[j], p[nxt[j]], x, t[j], dt[j])
        lo_u, hi_u = t[i] - dt[i], t[i] + 2 * dt[i]
        lo_w, hi_w = t[j] - dt[j], t[j] + 2 * dt[j]
        if not closed:
            lo_u, lo_w = np.maximum(lo_u, 0.0), np.maximum(lo_w, 0.0)
            hi_u, hi_w = np.minimum(hi_u, 1.0), np.minimum(hi_w, 1.0)
        u, w, res = _refine(curve, closed, u0, w0, lo_u, hi_u, lo_w, hi_w)
        if np.any(res > ACCEPT_TOL):
            bad = int(np.argmax(res))
            raise NonConvergence(
                f"double point refinement stalled at residual {res[bad]:.3e} near t = ({u0[bad]:.6f}, {w0[bad]:.6f})"
            )
        results.append((u, w))
    if len(overlaps):
        # coincident strands: a continuum of self-tangencies; report one per chord pair
        i, j = overlaps[:, 0], overlaps[:, 1]
        results.append((t[i] + 0.5 * dt[i], t[j] + 0.5 * dt[j]))
    if not results:
        return []
    u = np.concatenate([r[0] for r in results])
    w = np.concatenate([r[1] for r in results])
    dps = _make_double_points(curve, closed, u, w)
    if len(overlaps):
        for d in dps:
            # strands that coincide are parallel; mark them even if the midpoint guess is rough
            if np.linalg.norm(np.cross(*d.tangents)) < 1e-3 and np.linalg.norm(curve(d.t0) - curve(d.t1)) < 1e-6:
                d.kind = "self_tangency"
                d.generic = False
    return dps


def find_triple_points(double_points):
    """Group double points sharing one image into triple points."""
    pts = list(double_points)
    if len(pts) < 2:
        return []
    tree = cKDTree(np.array([d.point for d in pts]))
    near = tree.query_ball_point(tree.data, TRIPLE_CLUSTER_TOL)
    used = [False] * len(pts)
    out = []
    for a in range(len(pts)):
        if used[a]:
            continue
        cluster = [a] + sorted(b for b in near[a] if b > a and not used[b])
        if len(cluster) < 2:
            continue
        params = []
        tangents = []
        for c in cluster:
            for t, tan in zip((pts[c].t0, pts[c].t1), pts[c].tangents):
                if all(abs(t - q) > DEDUP_TOL for q in params):
                    params.append(t)
                    tangents.append(tan)
        if len(params) < 3:
            continue
        for c in cluster:
            used[c] = True
        order = np.argsort(params)
        params = [params[k] for k in order]
        tangents = [tangents[k] for k in order]
        generic = len(params) == 3 and all(
            np.linalg.norm(np.cross(tangents[x], tangents[y])) > TANGENCY_TOL
            for x in range(len(params))
            for y in range(x + 1, len(params))
        )
        out.append(TriplePoint(ts=tuple(params), generic=bool(generic), point=pts[cluster[0]].point))
    return out


def _in_arc_set(x, t_minus, t_plus):
    if t_minus < t_plus:
        return t_minus - 1e-12 <= x < t_plus - 1e-12
    return x < t_plus - 1e-12 or x >= t_minus - 1e-12


def find_arcs(curve, double_points):
    """Both arcs of every transversal double point, with sign and simplicity."""
    arcs = []
    trans = [d for d in double_points if d.kind == "transversal"]
    for d in trans:
        for tm, tp in ((d.t0, d.t1), (d.t1, d.t0)):
            simple = True
            for e in double_points:
                if e is d:
                    continue
                if _in_arc_set(e.t0, tm, tp) and _in_arc_set(e.t1, tm, tp):
                    simple = False
                    break
            pm, vm, _ = curve.jet(tm)
            _, vp, _ = curve.jet(tp)
            det = float(np.linalg.det(np.stack([pm[0], vp[0], vm[0]], -1)))
            arcs.append(Arc(t_minus=tm, t_plus=tp, sign="positive" if det > 0 else "negative", simple=simple))
    return arcs


# ------------------------------------------------------------ convexity


def _planar_cone_hull(p, axis):
    """Cone hull through the hull of the central projection onto the plane x . axis = 1.

    Only valid when every point has a positive component along ``axis``.
    Much faster than the 3d hull, which struggles with cocircular points.
    """
    u = np.cross(axis, [1.0, 0.0, 0.0] if abs(axis[0]) < 0.9 else [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    h = p @ axis
    q = np.stack([p @ u / h, p @ w / h], 1)
    hull = ConvexHull(q)
    verts = hull.vertices  # counterclockwise in 2d
    a, b = p[verts], p[np.roll(verts, -1)]
    normals = np.cross(a, b)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    # orient inward: the centroid direction lies on the positive side
    normals *= np.where(normals @ axis >= 0, 1.0, -1.0)[:, None]
    flags = np.zeros(len(p), dtype=bool)
    flags[verts] = True
    if len(hull.coplanar):
        flags[hull.coplanar[:, 0]] = True
    rest = np.flatnonzero(~flags)
    for chunk in np.array_split(rest, max(1, len(rest) * len(normals) // 2**22 + 1)):
        if len(chunk):
            flags[chunk] = np.abs(p[chunk] @ normals.T).min(axis=1) < BOUNDARY_TOL
    return ConeHull(facets=normals, boundary_flags=flags, full_space=False)


def cone_hull(curve, n_samples=1024, points=None, planar=True):
    """Supporting planes through the origin of the cone spanned by the curve.

    With ``planar`` the hull is computed in a central projection whenever the
    points lie in an open hemisphere; otherwise the 3d hull with the origin.
    """
    if points is None:
        t = np.linspace(0.0, 1.0, n_samples, endpoint=not is_closed(curve))
        points = curve._jet(t)[0]
    p = np.asarray(points, dtype=float)
    n = len(p)
    m = p.mean(axis=0)
    if planar and np.linalg.norm(m) > HEMISPHERE_TOL:
        axis = m / np.linalg.norm(m)
        if (p @ axis).min() > HEMISPHERE_TOL:
            try:
                return _planar_cone_hull(p, axis)
            except QhullError:
                pass
    pts = np.vstack([np.zeros(3), p])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # everything coplanar with the origin: the cone has empty interior
        _, _, vt = np.linalg.svd(p)
        nrm = vt[2]
        return ConeHull(facets=np.stack([nrm, -nrm]), boundary_flags=np.ones(n, bool), full_space=False)
    eq = hull.equations  # n.x + off <= 0 inside
    scale = max(1.0, float(np.abs(pts).max()))
    through = np.abs(eq[:, 3]) < 1e-12 * scale
    if not through.any():
        return ConeHull(facets=np.zeros((0, 3)), boundary_flags=np.zeros(n, bool), full_space=True)
    normals = -eq[through, :3]
    flags = np.zeros(n + 1, dtype=bool)
    flags[np.unique(hull.simplices[through])] = True
    if len(hull.coplanar):
        fac = through[hull.coplanar[:, 1]]
        flags[hull.coplanar[fac, 0]] = True
    flags = flags[1:]
    dist = np.abs(p @ normals.T).min(axis=1)
    flags |= dist < BOUNDARY_TOL
    return ConeHull(facets=normals, boundary_flags=flags, full_space=False)


def is_convex_curve(curve, n_samples=2048):
    """Simple and contained in the boundary of its cone."""
    try:
        if find_double_points(curve, n_samples):
            return False
    except Degenerate:
        return False
    hull = cone_hull(curve, n_samples)
    return bool(not hull.full_space and hull.boundary_flags.all())


def scan(curve, n_samples=4096):
    """All diagnostics of a curve."""
    prof = geodesic_curvature_profile(curve, n_samples)
    degenerate = False
    laps = 0
    try:
        dps = find_double_points(curve, n_samples)
    except Degenerate:
        degenerate = True
        dps = []
        _, _, p, _ = _grid(curve, n_samples)
        laps = circle_laps(p)
    tps = find_triple_points(dps)
    arcs = find_arcs(curve, dps)
    if degenerate:
        convex = False
    elif dps:
        convex = False
    else:
        hull = cone_hull(curve, min(n_samples, 2048))
        convex = bool(not hull.full_space and hull.boundary_flags.all())
    tangencies = any(d.kind == "self_tangency" for d in dps)
    generic = not degenerate and not tps and not tangencies
    return CurveDiagnostics(
        curvature_min=prof.curvature_min,
        locally_convex=prof.locally_convex,
        double_points=dps,
        triple_points=tps,
        arcs=arcs,
        convex=convex,
        generic=generic,
        degenerate=degenerate,
        laps=laps,
    )


def sub_curve(curve, a, b):
    """Restriction of a closed curve to [a, b], with b possibly beyond 1."""
    return restrict(curve, a, b)

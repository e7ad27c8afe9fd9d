"""Topological degree of maps into S^3 and S^2 by quadrature and by counting preimages.

Domains are rectangles ``[0, 2 pi] x [0, pi] (x [0, 1])`` in the variables
``(s1, s2, t)`` with s1 and t periodic and the edges s2 = 0, pi collapsed.
The orientation is the one for which the coordinate chart
``(s1, s2) -> (sin s2 cos s1, sin s2 sin s1, cos s2)`` has degree +1 (that is,
the ordered frame is (d/ds2, d/ds1, d/dt)).
"""

from dataclasses import dataclass, field

import numpy as np

from . import rotalg
from .classify import RHO_BAR, g1_from_diagnostics, is_star
from .curvekit import GeneratorF1, GeneratorG
from .errors import NonRegular, ResidualTooLarge
from .framelift import lift_curve
from .geomscan import DoublePoint, scan


ACCEPT_RESIDUAL = 0.1
NEWTON_TOL = 1e-8
JAC_STEP = 1e-6
REGULAR_TOL = 1e-8
MERGE_TOL = 1e-4
TWO_PI = 2 * np.pi


@dataclass
class DegreeReport:
    value: float
    rounded: int
    residual: float
    method: str
    preimages: list = field(default_factory=list)
    grid: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def accepted(self):
        return self.residual < ACCEPT_RESIDUAL

    def to_json(self):
        return {
            "value": self.value,
            "rounded": self.rounded,
            "abs_degree": abs(self.rounded),
            "residual": self.residual,
            "method": self.method,
            "preimages": [{"point": list(map(float, p)), "sign": int(s)} for p, s in self.preimages],
            "grid": list(self.grid),
            "extra": self.extra,
        }


def _report(value, method, grid, **extra):
    r = int(np.rint(value))
    return DegreeReport(value=float(value), rounded=r, residual=float(abs(value - r)), method=method, grid=tuple(grid), extra=extra)


def cell_grid(n1, n2, n3=None):
    """Cell-centred coordinates on [0, 2 pi] x [0, pi] (x [0, 1])."""
    s1 = (np.arange(n1) + 0.5) * TWO_PI / n1
    s2 = (np.arange(n2) + 0.5) * np.pi / n2
    if n3 is None:
        return s1, s2
    t = (np.arange(n3) + 0.5) / n3
    return s1, s2, t


def _partial(values, axis, h, periodic):
    if periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2 * h)
    return np.gradient(values, h, axis=axis, edge_order=2)


# ------------------------------------------------------------ S^3


def quadrature_s3(values, periodic=(True, False, True)):
    """Degree of a map into S^3 sampled on a cell-centred (s1, s2, t) grid."""
    n1, n2, n3, _ = values.shape
    h1, h2, h3 = TWO_PI / n1, np.pi / n2, 1.0 / n3
    d1 = _partial(values, 0, h1, periodic[0])
    d2 = _partial(values, 1, h2, periodic[1])
    d3 = _partial(values, 2, h3, periodic[2])
    m = np.stack([values, d2, d1, d3], axis=-1)
    dets = np.linalg.det(m)
    return float(dets.sum() * h1 * h2 * h3 / (2 * np.pi**2))


def _newton_s3(point_map, x0, target, period=(TWO_PI, None, 1.0)):
    """Damped Newton for point_map(x) = target on the 3-dimensional domain."""
    basis = _tangent_basis(target)
    x = np.array(x0, dtype=float)

    def res(x):
        return basis @ point_map(x)

    r = res(x)
    for _ in range(60):
        if np.linalg.norm(point_map(x) - target) < NEWTON_TOL:
            break
        jac = np.empty((3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = JAC_STEP
            jac[:, k] = (res(x + e) - res(x - e)) / (2 * JAC_STEP)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            xn[1] = np.clip(xn[1], 1e-9, np.pi - 1e-9)
            rn = res(xn)
            if np.linalg.norm(rn) < np.linalg.norm(r) or lam < 2e-4:
                break
            lam /= 2
        x, r = xn, rn
    return x, float(np.linalg.norm(point_map(x) - target))


def _tangent_basis(q):
    """Rows spanning the orthogonal complement of q in R^4."""
    m = np.linalg.svd(q.reshape(1, 4))[2]
    return m[1:]


def _orient_det(point_map, x, h=JAC_STEP):
    f = point_map(x)
    cols = [f]
    for k in (1, 0, 2):
        e = np.zeros(3)
        e[k] = h
        cols.append((point_map(x + e) - point_map(x - e)) / (2 * h))
    return float(np.linalg.det(np.stack(cols, -1)))


def count_preimages_s3(values, point_map, target=rotalg.J, coords=None, radius=0.35):
    """Signed preimages of ``target``: grid seeds refined by Newton, merged, signed."""
    s1, s2, t = coords
    dist = np.linalg.norm(values - target, axis=-1)
    seeds = np.argwhere(dist < radius)
    # keep local minima of the distance among seeds
    order = np.argsort(dist[tuple(seeds.T)])
    roots = []
    tried = 0
    for idx in seeds[order]:
        x0 = np.array([s1[idx[0]], s2[idx[1]], t[idx[2]]])
        if any(_domain_dist(x0, r) < 0.2 for r, _ in roots):
            continue
        tried += 1
        x, err = _newton_s3(point_map, x0, target)
        if err > NEWTON_TOL:
            if tried > 50:
                break
            continue
        x[0] = np.mod(x[0], TWO_PI)
        x[2] = np.mod(x[2], 1.0)
        if any(_domain_dist(x, r) < MERGE_TOL for r, _ in roots):
            continue
        det = _orient_det(point_map, x)
        if abs(det) < REGULAR_TOL:
            raise NonRegular(f"preimage at {np.round(x, 6).tolist()} has Jacobian {det:.2e}")
        roots.append((x, int(np.sign(det))))
    return roots


def _domain_dist(a, b):
    d = np.abs(a - b)
    d[0] = min(d[0], TWO_PI - d[0])
    d[2] = min(d[2], 1.0 - d[2])
    return float(np.linalg.norm(d))


def degree_to_s3(value_fn, point_map=None, grid=64, target=rotalg.J, raise_on_residual=False):
    """Degree of a map (s1, s2, t) -> S^3.

    ``value_fn(s1, s2, t)`` evaluates the map on the full tensor grid of the
    given coordinate vectors and returns an array of shape (n1, n2, n3, 4).
    When ``point_map`` is given, the signed preimages of ``target`` are also
    counted and must agree with the quadrature.
    """
    coords = cell_grid(grid, grid, grid)
    values = value_fn(*coords)
    q = quadrature_s3(values)
    rep = _report(q, "quadrature", (grid, grid, grid))
    if point_map is not None:
        roots = count_preimages_s3(values, point_map, target, coords)
        rep.preimages = [(x, s) for x, s in roots]
        rep.extra["preimage_degree"] = int(sum(s for _, s in roots))
        rep.extra["methods_agree"] = rep.extra["preimage_degree"] == rep.rounded
    if raise_on_residual and not rep.accepted:
        raise ResidualTooLarge(f"quadrature residual {rep.residual:.3f}")
    return rep


# ------------------------------------------------------------ the lift of f1


def generator_lift_table(s2_values, n_tau):
    """Lifts of the frame paths of g_s over 4/3 of a period, for each s in ``s2_values``.

    Returns an array (len(s2_values), n_tau + 1, 4) sampled at times
    t = (4/3) k / n_tau, where one period of g_s is t in [0, 1].
    """
    ts = np.arange(n_tau + 1) / n_tau * (4.0 / 3.0)
    out = np.empty((len(s2_values), n_tau + 1, 4))
    for i, s in enumerate(s2_values):
        res = lift_curve(GeneratorG(s), ts=ts)
        idx = np.searchsorted(res.ts, ts)
        out[i] = res.lift[idx]
    return out


def f1_lift_values(s1, s2, t, oversample=4):
    """The lift of the frame of f1(s1, s2) at time t, on a tensor grid.

    Uses f1(s1, s2)(t) = R g_{s2}(t + s1 / (6 pi)) with a fixed rotation R,
    so the lift is conj(L(s1 / (6 pi))) L(t + s1 / (6 pi)) for the lift L of
    the frame of g_{s2}.  Requires uniform cell-centred grids.
    """
    n1, n3 = len(s1), len(t)
    # common time lattice containing every shift and every shifted time
    base = 6 * n1 * n3 // np.gcd(6 * n1, n3)
    step = oversample * base
    n_tau = int(round(step * 4 / 3))
    while True:
        shifts = s1 / (6 * np.pi)
        i0 = np.rint(shifts * step).astype(int)
        it = np.rint(t * step).astype(int)
        ok = np.allclose(i0 / step, shifts, atol=1e-12) and np.allclose(it / step, t, atol=1e-12)
        if ok:
            break
        step *= 2
        n_tau = int(round(step * 4 / 3))
    table = generator_lift_table(s2, n_tau)  # indices k <-> time k / step
    out = np.empty((n1, len(s2), n3, 4))
    for a in range(n1):
        start = table[:, i0[a]]
        later = table[:, i0[a] + it]
        out[a] = rotalg.quat_mul(rotalg.quat_conj(start)[:, None, :], later)
    return out


def f1_lift_point(x, n_samples=2048):
    """The lift of the frame of f1(s1, s2) at time t, for one point x = (s1, s2, t)."""
    s1, s2, t = x
    ts = np.union1d(np.linspace(0.0, 1.0, n_samples + 1), [np.mod(t, 1.0)])
    res = lift_curve(GeneratorF1(np.mod(s1, TWO_PI), np.clip(s2, 0.0, np.pi)), ts=ts)
    return res.lift[np.searchsorted(res.ts, np.mod(t, 1.0))]


def degree_f1_lift(grid=64, count=True):
    rep = degree_to_s3(f1_lift_values, f1_lift_point if count else None, grid=grid)
    return rep


# ------------------------------------------------------------ test maps into S^3


def wrap_map_values(s1, s2, t):
    """exp(2 pi l(s) t) for t <= 1/2, then a fixed geodesic from -1 back to 1."""
    S1, S2, T = np.meshgrid(s1, s2, t, indexing="ij")
    return wrap_map(np.stack([S1, S2, T], -1))


def wrap_map(x):
    x = np.asarray(x, dtype=float)
    s1, s2, t = x[..., 0], x[..., 1], np.mod(x[..., 2], 1.0)
    ell = np.stack([np.zeros_like(s1), np.sin(s2) * np.cos(s1), np.sin(s2) * np.sin(s1), np.cos(s2)], -1)
    first = rotalg.quat_exp_imaginary(ell * (TWO_PI * np.minimum(t, 0.5))[..., None])
    back = rotalg.geodesic_s3(-rotalg.ONE, rotalg.ONE, np.clip(2 * t - 1, 0.0, 1.0))
    return np.where((t <= 0.5)[..., None], first, back)


def constant_map_values(s1, s2, t):
    return np.broadcast_to(rotalg.ONE, (len(s1), len(s2), len(t), 4)).copy()


# ------------------------------------------------------------ S^2


def quadrature_s2(values, periodic=(True, False)):
    """(1/4 pi) sum <F, dF/ds2 x dF/ds1> dA on a cell-centred (s1, s2) grid."""
    n1, n2, _ = values.shape
    h1, h2 = TWO_PI / n1, np.pi / n2
    d1 = _partial(values, 0, h1, periodic[0])
    d2 = _partial(values, 1, h2, periodic[1])
    dens = np.einsum("ijk,ijk->ij", values, np.cross(d2, d1))
    return float(dens.sum() * h1 * h2 / (4 * np.pi))


def solid_angle(a, b, c):
    """Signed solid angle of the spherical triangle abc (vectorized)."""
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    den = 1 + np.einsum("...i,...i->...", a, b) + np.einsum("...i,...i->...", b, c) + np.einsum("...i,...i->...", c, a)
    return 2 * np.arctan2(num, den)


def simplicial_s2(node_values):
    """Degree from signed areas of geodesic triangles on a node grid.

    ``node_values`` has shape (n1, n2 + 1, 3) on nodes s1 = 2 pi i / n1 and
    s2 = pi j / n2 (both pole rows included); s1 is periodic.
    """
    v = node_values
    a = v[:, :-1]
    b = np.roll(v, -1, axis=0)[:, :-1]
    c = np.roll(v, -1, axis=0)[:, 1:]
    d = v[:, 1:]
    # orientation (d/ds2, d/ds1): triangle (a, d, c) and (a, c, b)
    total = solid_angle(a, d, c).sum() + solid_angle(a, c, b).sum()
    return float(total / (4 * np.pi))


def degree_s2(values=None, node_values=None, method="quadrature"):
    if method == "quadrature":
        n1, n2, _ = values.shape
        return _report(quadrature_s2(values), "quadrature", (n1, n2))
    if method == "simplicial":
        n1, m, _ = node_values.shape
        return _report(simplicial_s2(node_values), "simplicial", (n1, m - 1))
    raise ValueError(f"unknown method {method!r}")


def sphere_chart(s1, s2):
    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    return np.stack([np.sin(S2) * np.cos(S1), np.sin(S2) * np.sin(S1), np.cos(S2)], -1)


# ------------------------------------------------------------ g1 o f1


@dataclass
class SliceDiagnostics:
    """Diagnostics of f1(0, s2), enough to evaluate g1 on every f1(s1, s2)."""

    s2: float
    diag: object
    star: bool


def f1_slice(s2, n_samples=4096):
    curve = GeneratorF1(0.0, s2)
    d = scan(curve, n_samples)
    star = is_star(curve, d)[0] if not d.degenerate else False
    return SliceDiagnostics(s2=float(s2), diag=d, star=star)


def shifted(diag, shift):
    """Diagnostics of the same curve with the parameter moved by ``shift``."""
    from copy import copy

    out = copy(diag)
    dps = []
    for d in diag.double_points:
        a, b = np.mod(d.t0 - shift, 1.0), np.mod(d.t1 - shift, 1.0)
        t0, t1 = min(a, b), max(a, b)
        dps.append(DoublePoint(t0=float(t0), t1=float(t1), kind=d.kind, generic=d.generic, point=d.point, tangents=d.tangents))
    out.double_points = dps
    return out


def g1_f1_values(s1, s2, rho_bar=RHO_BAR, slices=None, n_samples=4096):
    """g1(f1(s1, s2)) on a tensor grid, from one scan per value of s2."""
    if slices is None:
        slices = [f1_slice(s, n_samples) for s in s2]
    out = np.empty((len(s1), len(s2), 3))
    for j, sl in enumerate(slices):
        for i, a in enumerate(s1):
            d = shifted(sl.diag, a / (6 * np.pi)) if not sl.diag.degenerate else sl.diag
            out[i, j] = g1_from_diagnostics(d, sl.star, rho_bar)
    return out, slices


def degree_g1_f1(grid=256, rho_bar=RHO_BAR, method="simplicial", slices=None):
    """Degree of g1 o f1 on a grid x grid lattice.

    The default integrates the area form exactly over geodesic triangles of
    the node lattice.  The central-difference rule ("quadrature") needs the
    narrow trefoil band to span many cells and is kept for comparison.
    """
    if method == "quadrature":
        s1, s2 = cell_grid(grid, grid)
        vals, slices = g1_f1_values(s1, s2, rho_bar, slices)
        rep = degree_s2(values=vals, method="quadrature")
    else:
        s1 = np.arange(grid) * TWO_PI / grid
        s2 = np.arange(grid + 1) * np.pi / grid
        vals, slices = g1_f1_values(s1, s2, rho_bar, slices)
        rep = degree_s2(node_values=vals, method="simplicial")
    rep.extra["rho_bar"] = rho_bar
    return rep, slices

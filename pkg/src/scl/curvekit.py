"""Curve expressions on the unit sphere with first and second derivatives.

A curve is an immutable tree of nodes.  Every node evaluates, for an array of
parameters ``t``, the 2-jet ``(p, v, a)`` = (position, first derivative,
second derivative) as three ``(N, 3)`` arrays.  Closed-form nodes give exact
derivatives; composite nodes use the chain and product rules.

All curves are parametrized by ``t`` in [0, 1].  Periodic nodes (closed
curves) accept any real ``t`` and reduce it modulo 1.
"""

from dataclasses import dataclass

import numpy as np

from . import rotalg
from .errors import JunctionMismatch, NotImmersed, OutOfDomain

TWO_PI = 2.0 * np.pi
#: endpoint tolerance of the gluing condition of ``concat_star``
JUNCTION_TOL = 1e-8
#: tangent-direction tolerance when a locally convex concatenation is requested
TANGENT_TOL = 1e-6
#: step of the finite differences used for frame second derivatives
FD_STEP = 1e-5
IMMERSION_TOL = 1e-9

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Jet2:
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray


def _as_array(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


def frame_from_jet(p, v):
    """Frames (gamma, unit tangent, gamma x unit tangent) as ``(N, 3, 3)`` column matrices."""
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed <= IMMERSION_TOL):
        raise NotImmersed(f"tangent vanishes (min speed {speed.min():.3e})")
    vh = v / speed[..., None]
    return np.stack([p, vh, np.cross(p, vh)], axis=-1)


def frame_derivative_from_jet(p, v, a):
    """Exact derivative of ``frame_from_jet`` computed from the 2-jet."""
    speed = np.linalg.norm(v, axis=-1)
    if np.any(speed <= IMMERSION_TOL):
        raise NotImmersed(f"tangent vanishes (min speed {speed.min():.3e})")
    vh = v / speed[..., None]
    dvh = (a - np.sum(a * vh, axis=-1)[..., None] * vh) / speed[..., None]
    return np.stack([v, dvh, np.cross(p, dvh)], axis=-1)


def normalize_jet(q, q1, q2):
    """Jet of ``q/|q|`` from the jet of ``q``."""
    r = np.linalg.norm(q, axis=-1)[..., None]
    r1 = np.sum(q * q1, axis=-1)[..., None] / r
    r2 = (np.sum(q1 * q1, axis=-1)[..., None] + np.sum(q * q2, axis=-1)[..., None]) / r - r1**2 / r
    p = q / r
    p1 = q1 / r - q * r1 / r**2
    p2 = q2 / r - 2 * q1 * r1 / r**2 - q * r2 / r**2 + 2 * q * r1**2 / r**3
    return p, p1, p2


class CurveExpr:
    """Base class of curve nodes."""

    periodic = False

    def _jet(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def breaks(self):
        """Parameters in (0, 1) where the second derivative may jump."""
        return ()

    def jet(self, t):
        """Vectorized 2-jet at the parameters ``t``.

        Periodic curves reduce ``t`` modulo 1; other curves raise OutOfDomain
        outside [0, 1].
        """
        t = _as_array(t)
        if self.periodic:
            t = np.mod(t, 1.0)
        else:
            if np.any(t < -1e-12) or np.any(t > 1 + 1e-12):
                raise OutOfDomain("parameter outside [0, 1]")
            t = np.clip(t, 0.0, 1.0)
        return self._jet(t)

    def __call__(self, t):
        return self.jet(t)[0]

    def start(self):
        return self.jet(0.0)[0][0]

    def end(self):
        p = self._jet(np.array([1.0]))[0][0]
        return p

    def to_json(self):  # pragma: no cover - abstract
        raise NotImplementedError


def eval2(curve, t):
    """2-jet of ``curve`` at a single parameter ``t`` in [0, 1]."""
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise OutOfDomain(f"t = {t} outside [0, 1]")
    if t == 1.0:
        p, v, a = curve._jet(np.array([1.0]))
    else:
        p, v, a = curve.jet(t)
    return Jet2(p[0], v[0], a[0])


# ---------------------------------------------------------------- primitives


class NuTheta(CurveExpr):
    """The circle through e1 tangent to e2 tilted by ``theta``, traversed ``laps`` times."""

    periodic = True

    def __init__(self, theta, laps=1):
        theta = float(theta)
        if not 0.0 < theta < np.pi:
            raise ValueError(f"theta must lie in (0, pi), got {theta}")
        if laps < 1 or int(laps) != laps:
            raise ValueError("laps must be a positive integer")
        self.theta = theta
        self.laps = int(laps)

    def _jet(self, t):
        w = TWO_PI * self.laps
        ph = w * t
        st, ct = np.sin(self.theta), np.cos(self.theta)
        c, s = np.cos(ph), np.sin(ph)
        p = np.stack([ct**2 + st**2 * c, st * s, ct * st * (1 - c)], -1)
        v = w * np.stack([-(st**2) * s, st * c, ct * st * s], -1)
        a = w * w * np.stack([-(st**2) * c, -st * s, ct * st * c], -1)
        return p, v, a

    def to_json(self):
        if self.laps == 1:
            return {"node": "nu_theta", "theta": self.theta}
        return {"node": "nu_theta", "theta": self.theta, "laps": self.laps}


class NuK(NuTheta):
    """The standard circle nu = nu_{pi/4} traversed ``k`` times."""

    def __init__(self, k):
        super().__init__(np.pi / 4, laps=k)

    @property
    def k(self):
        return self.laps

    def to_json(self):
        return {"node": "nu_k", "k": self.laps}


def g_jet_tau(s, tau):
    """``g_s`` and its first two derivatives in the 2pi-periodic native parameter."""
    ss, cs = np.sin(s), np.cos(s)
    c1, s1 = np.cos(tau), np.sin(tau)
    c3, s3 = np.cos(3 * tau), np.sin(3 * tau)
    z = np.zeros_like(tau)
    a0 = np.stack([ss * c1, ss * s1, cs + z], -1)
    a0d = np.stack([-ss * s1, ss * c1, z], -1)
    a0dd = np.stack([-ss * c1, -ss * s1, z], -1)
    a1 = np.stack([-s1, c1, z], -1)
    a1d = np.stack([-c1, -s1, z], -1)
    a1dd = -a1
    a2 = np.stack([-cs * c1, -cs * s1, ss + z], -1)
    a2d = np.stack([cs * s1, -cs * c1, z], -1)
    a2dd = np.stack([cs * c1, cs * s1, z], -1)
    c3, s3 = c3[..., None], s3[..., None]
    h = c3 * a1 + s3 * a2
    hd = -3 * s3 * a1 + c3 * a1d + 3 * c3 * a2 + s3 * a2d
    hdd = -9 * c3 * a1 - 6 * s3 * a1d + c3 * a1dd - 9 * s3 * a2 + 6 * c3 * a2d + s3 * a2dd
    k = np.sqrt(2.0) / 2.0
    return k * (a0 + h), k * (a0d + hd), k * (a0dd + hdd)


def g_frame_tau(s, tau):
    p, v, _ = g_jet_tau(s, np.atleast_1d(np.asarray(tau, dtype=float)))
    return frame_from_jet(p, v)


class GeneratorG(CurveExpr):
    """The generator curve ``g_s``; one traversal of its native 2pi period is t in [0, 1]."""

    periodic = True

    def __init__(self, s):
        s = float(s)
        if not 0.0 <= s <= np.pi:
            raise ValueError("s must lie in [0, pi]")
        self.s = s

    def _jet(self, t):
        p, v, a = g_jet_tau(self.s, TWO_PI * t)
        return p, TWO_PI * v, TWO_PI**2 * a

    def to_json(self):
        return {"node": "g", "s": self.s}


class GeneratorF1(CurveExpr):
    """The sphere of closed curves ``f1(s1, s2)``, normalized to start at e1 heading e2."""

    periodic = True

    def __init__(self, s1, s2):
        s1, s2 = float(s1), float(s2)
        if not (0.0 <= s1 <= TWO_PI and 0.0 <= s2 <= np.pi):
            raise ValueError("f1 needs s1 in [0, 2pi] and s2 in [0, pi]")
        self.s1 = s1
        self.s2 = s2
        self.shift = s1 / 3.0
        self.r0 = g_frame_tau(s2, self.shift)[0].T

    def _jet(self, t):
        p, v, a = g_jet_tau(self.s2, TWO_PI * t + self.shift)
        r = self.r0
        return p @ r.T, TWO_PI * (v @ r.T), TWO_PI**2 * (a @ r.T)

    def to_json(self):
        return {"node": "f1", "s1": self.s1, "s2": self.s2}


class GeodesicArc(CurveExpr):
    """Constant speed minimizing great-circle arc from ``p`` to ``q``."""

    def __init__(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        self._given = (p.tolist(), q.tolist())
        p = p / np.linalg.norm(p)
        q = q / np.linalg.norm(q)
        c = float(np.clip(p @ q, -1, 1))
        self.p, self.q = p, q
        self.omega = np.arccos(c)
        perp = q - c * p
        n = np.linalg.norm(perp)
        if n < 1e-14:
            if c < 0:
                raise ValueError("geodesic arc between antipodal points is not unique")
            perp = np.zeros(3)
        else:
            perp = perp / n
        self.u = perp

    def _jet(self, t):
        w = self.omega
        c, s = np.cos(w * t)[:, None], np.sin(w * t)[:, None]
        p = c * self.p + s * self.u
        v = w * (-s * self.p + c * self.u)
        a = -(w**2) * p
        return p, v, a

    def to_json(self):
        return {"node": "geodesic_arc", "p": self._given[0], "q": self._given[1]}


_QH = np.array(
    [
        [1, 0, 0, -10, 15, -6],
        [0, 1, 0, -6, 8, -3],
        [0, 0, 0.5, -1.5, 1.5, -0.5],
        [0, 0, 0, 0.5, -1, 0.5],
        [0, 0, 0, -4, 7, -3],
        [0, 0, 0, 10, -15, 6],
    ]
)


def _poly_eval(coef, u, order):
    """Evaluate the ``order``-th derivative of polynomials with ascending coefficient rows."""
    c = coef.copy()
    for _ in range(order):
        c = c[:, 1:] * np.arange(1, c.shape[1])
    powers = u[:, None] ** np.arange(c.shape[1])
    return powers @ c.T


class Sampled(CurveExpr):
    """Curve given on a uniform grid by positions and first/second derivatives.

    Between grid points each coordinate is the quintic Hermite interpolant of
    the value and both derivatives; the result is projected back onto the
    sphere.
    """

    def __init__(self, points, d1, d2, periodic=False):
        self.points = np.asarray(points, dtype=float)
        self.d1 = np.asarray(d1, dtype=float)
        self.d2 = np.asarray(d2, dtype=float)
        if not (self.points.shape == self.d1.shape == self.d2.shape) or self.points.ndim != 2:
            raise ValueError("points, d1 and d2 must be (n, 3) arrays of equal shape")
        if len(self.points) < 2:
            raise ValueError("need at least two samples")
        self.periodic = bool(periodic)
        self.n = len(self.points)

    @classmethod
    def from_function(cls, fn, n, periodic=False):
        """Tabulate a jet-valued function ``fn(t) -> (p, v, a)`` on ``n`` grid points."""
        t = np.linspace(0.0, 1.0, n)
        p, v, a = fn(t)
        return cls(p, v, a, periodic=periodic)

    def _jet(self, t):
        h = 1.0 / (self.n - 1)
        x = t / h
        k = np.clip(np.floor(x).astype(int), 0, self.n - 2)
        u = x - k
        b0 = _poly_eval(_QH, u, 0)
        b1 = _poly_eval(_QH, u, 1) / h
        b2 = _poly_eval(_QH, u, 2) / h**2
        p0, p1 = self.points[k], self.points[k + 1]
        m0, m1 = self.d1[k] * h, self.d1[k + 1] * h
        c0, c1 = self.d2[k] * h * h, self.d2[k + 1] * h * h
        stack = np.stack([p0, m0, c0, c1, m1, p1], axis=1)  # (N, 6, 3)
        q = np.einsum("nb,nbd->nd", b0, stack)
        q1 = np.einsum("nb,nbd->nd", b1, stack)
        q2 = np.einsum("nb,nbd->nd", b2, stack)
        return normalize_jet(q, q1, q2)

    def to_json(self):
        return {
            "node": "sampled",
            "n": self.n,
            "periodic": self.periodic,
            "points": self.points.tolist(),
            "d1": self.d1.tolist(),
            "d2": self.d2.tolist(),
        }


# ---------------------------------------------------------------- combinators


class Concat(CurveExpr):
    """``left * right``: left on [0, 1/2] and right on [1/2, 1] at double speed."""

    def __init__(self, left, right, check_tangent=False):
        pl = left._jet(np.array([1.0]))
        pr = right._jet(np.array([0.0]))
        gap = np.linalg.norm(pl[0][0] - pr[0][0])
        if gap > JUNCTION_TOL:
            raise JunctionMismatch(f"left(1) and right(0) differ by {gap:.3e}")
        if check_tangent:
            tl = pl[1][0] / np.linalg.norm(pl[1][0])
            tr = pr[1][0] / np.linalg.norm(pr[1][0])
            if np.linalg.norm(tl - tr) > TANGENT_TOL:
                raise JunctionMismatch("tangent directions differ at the junction")
        self.left = left
        self.right = right
        self.periodic = left.periodic and right.periodic

    @property
    def breaks(self):
        out = [b / 2 for b in self.left.breaks] + [0.5] + [0.5 + b / 2 for b in self.right.breaks]
        return tuple(out)

    def _jet(self, t):
        p = np.empty((len(t), 3))
        v = np.empty_like(p)
        a = np.empty_like(p)
        lo = t < 0.5
        if lo.any():
            pl, vl, al = self.left._jet(np.clip(2 * t[lo], 0, 1))
            p[lo], v[lo], a[lo] = pl, 2 * vl, 4 * al
        hi = ~lo
        if hi.any():
            pr, vr, ar = self.right._jet(np.clip(2 * t[hi] - 1, 0, 1))
            p[hi], v[hi], a[hi] = pr, 2 * vr, 4 * ar
        return p, v, a

    def to_json(self):
        return {"node": "concat", "left": self.left.to_json(), "right": self.right.to_json()}


class Rotate(CurveExpr):
    """``Q gamma``: the inner curve moved by the rotation ``Q``."""

    def __init__(self, q, inner):
        q = np.asarray(q, dtype=float)
        quat = None
        if q.shape == (4,):
            rotalg.check_unit(q)
            quat = q.copy()
            q = rotalg.pi_project(q)
        if not rotalg.is_rotation(q, tol=1e-9):
            raise ValueError("Rotate needs a rotation matrix or a unit quaternion")
        self.q = q
        self.quat = quat if quat is not None else rotalg.rot_to_quat(q, check=False)[0]
        self.inner = inner
        self.periodic = inner.periodic

    @property
    def breaks(self):
        return self.inner.breaks

    def _jet(self, t):
        p, v, a = self.inner._jet(t)
        qt = self.q.T
        return p @ qt, v @ qt, a @ qt

    def to_json(self):
        return {"node": "rotate", "q": [float(x) for x in self.quat], "inner": self.inner.to_json()}


class Reparam(CurveExpr):
    """``inner(phi(t))`` for a monotone piecewise-affine ``phi``.

    ``knots`` is a sequence of ``(x, y)`` pairs with x running from 0 to 1
    strictly increasing and y non-decreasing.  At a knot the right-hand piece
    is used.  Values of y outside [0, 1] are only allowed for periodic inner
    curves.
    """

    def __init__(self, inner, knots):
        knots = np.asarray(knots, dtype=float)
        x, y = knots[:, 0], knots[:, 1]
        if len(x) < 2 or abs(x[0]) > 1e-15 or abs(x[-1] - 1) > 1e-15 or np.any(np.diff(x) <= 0):
            raise ValueError("reparametrization knots must run strictly from x=0 to x=1")
        if np.any(np.diff(y) < 0):
            raise ValueError("reparametrization must be monotone")
        if not inner.periodic and (y.min() < -1e-12 or y.max() > 1 + 1e-12):
            raise ValueError("reparametrization leaves [0, 1] on a non-periodic curve")
        self.inner = inner
        self.x = x
        self.y = y
        self.slopes = np.diff(y) / np.diff(x)
        span = y[-1] - y[0]
        self.periodic = bool(inner.periodic and abs(span - round(span)) < 1e-12 and round(span) >= 1)

    @property
    def breaks(self):
        out = set(float(b) for b in self.x[1:-1])
        for b in self.inner.breaks:
            for shift in range(int(np.floor(self.y[0])), int(np.ceil(self.y[-1])) + 1):
                target = b + shift
                for i, m in enumerate(self.slopes):
                    if m > 0 and self.y[i] < target < self.y[i + 1]:
                        out.add(float(self.x[i] + (target - self.y[i]) / m))
        return tuple(sorted(out))

    def phi(self, t):
        i = np.clip(np.searchsorted(self.x, t, side="right") - 1, 0, len(self.slopes) - 1)
        return self.y[i] + self.slopes[i] * (t - self.x[i]), self.slopes[i]

    def _jet(self, t):
        u, m = self.phi(t)
        if self.inner.periodic:
            u = np.mod(u, 1.0)
        else:
            u = np.clip(u, 0.0, 1.0)
        p, v, a = self.inner._jet(u)
        return p, v * m[:, None], a * (m * m)[:, None]

    def to_json(self):
        return {"node": "reparam", "knots": np.stack([self.x, self.y], 1).tolist(), "inner": self.inner.to_json()}


class FrameProduct(CurveExpr):
    """``t -> Gamma_base(t) inner(t)`` where Gamma_base is the frame of ``base``.

    The first derivative of the frame is exact (from the 2-jet of ``base``);
    the second derivative is a finite difference of the first with step
    ``FD_STEP``, taken on the side away from any break of ``base``.
    """

    def __init__(self, base, inner):
        self.base = base
        self.inner = inner
        self.periodic = base.periodic and inner.periodic

    @property
    def breaks(self):
        return tuple(sorted(set(self.base.breaks) | set(self.inner.breaks)))

    def _base_jet(self, t):
        if self.base.periodic:
            return self.base._jet(np.mod(t, 1.0))
        return self.base._jet(np.clip(t, 0.0, 1.0))

    def frames(self, t):
        """Frame of the base and its first two derivatives at ``t``."""
        h = FD_STEP
        p, v, a = self._base_jet(t)
        g = frame_from_jet(p, v)
        g1 = frame_derivative_from_jet(p, v, a)
        # choose one-sided stencils that do not straddle a break or a domain end
        forward = np.ones(len(t), dtype=bool)
        if not self.base.periodic:
            forward &= t + 2 * h <= 1.0
        for b in self.base.breaks:
            forward &= ~((t < b) & (t + 2 * h >= b))
        offs = np.where(forward, 1.0, -1.0) * h
        pp, vv, aa = self._base_jet(np.concatenate([t + offs, t + 2 * offs]))
        d = frame_derivative_from_jet(pp, vv, aa)
        n = len(t)
        g2 = (-3 * g1 + 4 * d[:n] - d[n:]) / (2 * offs)[:, None, None]
        return g, g1, g2

    def _jet(self, t):
        g, g1, g2 = self.frames(t)
        x, x1, x2 = self.inner._jet(t)
        mv = lambda m, w: np.einsum("nij,nj->ni", m, w)
        p = mv(g, x)
        v = mv(g1, x) + mv(g, x1)
        a = mv(g2, x) + 2 * mv(g1, x1) + mv(g, x2)
        return p, v, a

    def to_json(self):
        return {"node": "frame_product", "base": self.base.to_json(), "inner": self.inner.to_json()}


# ---------------------------------------------------------------- constructors


def nu_theta(theta, laps=1):
    return NuTheta(theta, laps)


def nu_k(k):
    return NuK(k)


def make_generator_f1(s1, s2):
    return GeneratorF1(s1, s2)


def concat_star(g1, g2, check_tangent=False):
    return Concat(g1, g2, check_tangent=check_tangent)


def rotate_curve(q, g):
    return Rotate(q, g)


def frame_product(base, inner):
    return FrameProduct(base, inner)


def restrict(curve, a, b):
    """The curve on [a, b] reparametrized over [0, 1] (wrapping for periodic curves)."""
    return Reparam(curve, [(0.0, a), (1.0, b)])


def power(curve, k):
    """A periodic curve traversed ``k`` times."""
    if not curve.periodic:
        raise ValueError("power needs a periodic curve")
    return Reparam(curve, [(0.0, 0.0), (1.0, float(k))])


def join(pieces, breaks):
    """Piecewise curve: ``pieces[i]`` runs over ``[breaks[i], breaks[i+1]]``.

    Built from nested ``Concat`` nodes followed by one ``Reparam`` that moves
    the dyadic junctions to ``breaks``.
    """
    breaks = [float(b) for b in breaks]
    if len(breaks) != len(pieces) + 1 or breaks[0] != 0.0 or breaks[-1] != 1.0:
        raise ValueError("need len(pieces) + 1 breaks from 0 to 1")
    if np.any(np.diff(breaks) <= 0):
        raise ValueError("breaks must increase strictly")
    if len(pieces) == 1:
        return pieces[0]
    tree = pieces[-1]
    for piece in reversed(pieces[:-1]):
        tree = Concat(piece, tree)
    # piece i of the nested tree occupies [1 - 2^-i, 1 - 2^-(i+1)], the last one [1 - 2^-(m-1), 1]
    m = len(pieces)
    dy = [1 - 2.0 ** (-i) for i in range(m)] + [1.0]
    return Reparam(tree, list(zip(breaks, dy)))


def sample(curve, n, endpoint=None):
    """Uniform parameter grid and jets; closed curves omit t = 1 by default."""
    if endpoint is None:
        endpoint = not curve.periodic
    t = np.linspace(0.0, 1.0, n, endpoint=endpoint)
    return (t,) + tuple(curve.jet(t))


def is_closed(curve, tol=1e-8):
    p0 = curve._jet(np.array([0.0]))[0][0]
    p1 = curve._jet(np.array([1.0]))[0][0]
    return bool(np.linalg.norm(p0 - p1) < tol)

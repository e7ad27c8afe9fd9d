"""Curve fixtures used by the tests, the acceptance suite and the demos.

Planar fixtures are drawn in the tangent plane at e1 and carried to the
sphere by the gnomonic projection, which maps lines to great circles and so
preserves the sign of curvature and the crossing pattern.
"""

import numpy as np

from .curvekit import (
    Concat,
    GeneratorF1,
    NuK,
    NuTheta,
    Rotate,
    Sampled,
    normalize_jet,
    restrict,
)
from .framelift import frame_at

TWO_PI = 2 * np.pi


def gnomonic_jet(x, y, scale=1.0):
    """Sphere jet of the planar jet (x, y), each a triple (value, d1, d2) of arrays."""
    q = np.stack([np.ones_like(x[0]), scale * x[0], scale * y[0]], -1)
    q1 = np.stack([np.zeros_like(x[1]), scale * x[1], scale * y[1]], -1)
    q2 = np.stack([np.zeros_like(x[2]), scale * x[2], scale * y[2]], -1)
    return normalize_jet(q, q1, q2)


def planar_fourier(terms, scale, n=2049):
    """Closed curve from z(t) = sum c exp(2 pi i m t) over ``terms`` = [(c, m), ...]."""

    def fn(t):
        z = [np.zeros(len(t), complex) for _ in range(3)]
        for c, m in terms:
            w = TWO_PI * m
            e = c * np.exp(1j * w * t)
            z[0] += e
            z[1] += 1j * w * e
            z[2] += -(w**2) * e
        return gnomonic_jet([v.real for v in z], [v.imag for v in z], scale)

    return based(Sampled.from_function(fn, n, periodic=True))


def based(curve):
    """The curve rotated to start at e1 heading e2 (frame at t = 0 is the identity)."""
    g = frame_at(curve, 0.0)
    return Rotate(g.T, curve)


def limacon(b=0.5, scale=0.5, n=2049):
    """r = b + cos(phi): one inner loop for 0 < b < 1, positive curvature throughout."""
    # (b + cos p) e^{ip} = b e^{ip} + (1 + e^{2ip}) / 2
    return planar_fourier([(b, 1), (0.5, 2), (0.5, 0)], scale, n)


def star_curve(k, scale=0.4, n=2049):
    """Star with 2k + 1 double points: the epicycle e^{2 i phi} + a e^{-(2k - 1) i phi}.

    For k = 0 this is the limacon.  The amplitude ``a`` stays well inside the
    range where the planar curvature is positive.
    """
    if k == 0:
        return limacon(scale=scale, n=n)
    m = 2 * k - 1
    a = min(0.3, 0.4 * np.sqrt(8.0 / m**3))
    return planar_fourier([(1.0, 2), (a, -m)], scale, n)


def small_loop(scale=0.5, n=2049):
    """A convex-looking curve with exactly one small loop."""
    return limacon(b=0.9, scale=scale, n=n)


def rose_cluster(scale=0.5, n=2049):
    """r = sin 2 phi: four branches through one point, pairwise tangent in two pairs."""

    def fn(t):
        # sin(2p) e^{ip} with p = 2 pi t, as a trigonometric polynomial
        z = [np.zeros(len(t), complex) for _ in range(3)]
        for c, m in ((-0.5j, 3), (0.5j, -1)):
            w = TWO_PI * m
            e = c * np.exp(1j * w * t)
            z[0] += e
            z[1] += 1j * w * e
            z[2] += -(w**2) * e
        return gnomonic_jet([v.real for v in z], [v.imag for v in z], scale)

    return Sampled.from_function(fn, n, periodic=True)


def fourier_perturbed(base, amp, modes=3, seed=0, n=1025):
    """Closed Sampled curve: ``base`` plus a random trigonometric perturbation, reprojected."""
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=(modes, 2, 3)) * amp / np.arange(1, modes + 1)[:, None, None] ** 2

    def fn(t):
        p, v, a = base._jet(np.mod(t, 1.0))
        q, q1, q2 = p.copy(), v.copy(), a.copy()
        for m in range(1, modes + 1):
            w = TWO_PI * m
            c, s = np.cos(w * t)[:, None], np.sin(w * t)[:, None]
            cc, ss = coef[m - 1]
            q += c * cc + s * ss
            q1 += w * (-s * cc + c * ss)
            q2 += -(w**2) * (c * cc + s * ss)
        return normalize_jet(q, q1, q2)

    return Sampled.from_function(fn, n, periodic=base.periodic)


def oracle_fixtures(count=20, seed=7):
    """Randomized generic closed curves for the intersection oracle comparison."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            s2 = rng.uniform(1.2, 2.2)
            base = GeneratorF1(rng.uniform(0, TWO_PI), s2)
        elif kind == 1:
            base = GeneratorF1(rng.uniform(0, TWO_PI), rng.uniform(2.5, 3.0))
        elif kind == 2:
            base = NuTheta(rng.uniform(0.3, 1.2), laps=int(rng.integers(2, 4)))
        else:
            base = GeneratorF1(rng.uniform(0, TWO_PI), rng.uniform(0.3, 0.7))
        out.append(fourier_perturbed(base, amp=0.03, seed=int(rng.integers(1 << 30)), n=1025))
    return out


def grafting_corpus():
    """(name, curve, theta) triples for the grafting criterion."""
    return [
        ("nu_pi_2", NuTheta(np.pi / 2), np.pi / 4),
        ("nu", NuK(1), np.pi / 4),
        ("nu_3", NuK(3), np.pi / 4),
        ("f1_1_1", GeneratorF1(1.0, 1.0), np.pi / 4),
        ("f1_0_2.5", GeneratorF1(0.0, 2.5), 0.6),
        ("reversed_circle", NuTheta(2.0), np.pi / 4),
        ("short_right_arc", restrict(NuTheta(np.pi - 0.05), 0.0, 1 / TWO_PI), 1.5),
        ("perturbed_f1", fourier_perturbed(GeneratorF1(1.0, 1.0), 0.02, seed=1), np.pi / 4),
        ("perturbed_great_circle", fourier_perturbed(NuTheta(np.pi / 2), 0.05, seed=2), np.pi / 4),
        ("perturbed_reversed", fourier_perturbed(NuTheta(2.2), 0.03, seed=3), 1.0),
    ]


def x1_corpus():
    """Closed curves whose frame lifts end at +1."""
    return [
        ("nu_2", NuK(2)),
        ("nu_4", NuK(4)),
        ("f1_1_1", GeneratorF1(1.0, 1.0)),
        ("f1_0_2.5", GeneratorF1(0.0, 2.5)),
        ("f1_trefoil", GeneratorF1(0.0, 3 * np.pi / 4)),
        ("f1_star_side", GeneratorF1(0.0, 2.9)),
        ("flower_3", GeneratorF1(3 * np.pi / 2, 3 * np.pi / 4)),
        ("nu_0.6_twice", NuTheta(0.6, laps=2)),
        ("f1_4_0.3", GeneratorF1(4.0, 0.3)),
        ("nu_1.2_four", NuTheta(1.2, laps=4)),
    ]


def graft_x1(gamma):
    """nu^2 * gamma."""
    return Concat(NuK(2), gamma)


def flower_three():
    """The trefoil of the f1 family with its triple point at e1."""
    return GeneratorF1(3 * np.pi / 2, 3 * np.pi / 4)


def flower_one():
    """A convex closed curve: one petal."""
    return NuK(1)

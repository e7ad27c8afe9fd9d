"""SVG drawings of spherical curves with their double points and the base point e1."""

import hashlib
from pathlib import Path
import re

import numpy as np

from .curvekit import E1

MIN_SAMPLES = 512
STEREO_LIMIT = 6.0


def _basis(axis):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(helper, axis)
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    return axis, u, w


def project(points, projection="orthographic", axis=(0.0, 0.0, 1.0)):
    """Plane coordinates and a visibility flag per point.

    Orthographic: view from ``axis`` towards the origin; points with a
    negative component along ``axis`` are on the hidden hemisphere.
    Stereographic: from the pole ``axis`` onto the plane through the origin
    perpendicular to it; every point is visible.
    """
    pts = np.atleast_2d(points)
    a, u, w = _basis(axis)
    if projection == "orthographic":
        xy = np.stack([pts @ u, pts @ w], -1)
        return xy, pts @ a >= 0
    if projection == "stereographic":
        den = np.maximum(1.0 - pts @ a, 1e-9)
        xy = np.stack([pts @ u / den, pts @ w / den], -1)
        return np.clip(xy, -STEREO_LIMIT, STEREO_LIMIT), np.ones(len(pts), dtype=bool)
    raise ValueError(f"unknown projection {projection!r}")


def _runs(mask):
    """Maximal runs of equal values in a boolean array as (start, stop, value)."""
    edges = np.flatnonzero(np.diff(mask.astype(int))) + 1
    starts = np.concatenate([[0], edges])
    stops = np.concatenate([edges, [len(mask)]])
    return [(int(a), int(b), bool(mask[a])) for a, b in zip(starts, stops)]


def _fmt(x):
    return f"{x:.3f}"


def render_svg(curve, diagnostics=None, projection="orthographic", axis=(0.0, 0.0, 1.0), n_samples=1024, size=400, title=None):
    """SVG text for ``curve``; double points from ``diagnostics`` are marked when given."""
    n = max(int(n_samples), MIN_SAMPLES)
    t = np.linspace(0.0, 1.0, n + 1)
    p = curve._jet(t)[0]
    xy, vis = project(p, projection, axis)
    extent = 1.05 if projection == "orthographic" else max(1.05, float(np.abs(xy).max()) * 1.05)
    scale = size / (2 * extent)

    def to_screen(q):
        q = np.atleast_2d(q)
        return np.stack([size / 2 + scale * q[:, 0], size / 2 - scale * q[:, 1]], -1)

    scr = to_screen(xy)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    if projection == "orthographic":
        c = size / 2
        out.append(f'<circle class="sphere" cx="{_fmt(c)}" cy="{_fmt(c)}" r="{_fmt(scale)}" fill="none" stroke="#bbb"/>')
    for a, b, visible in _runs(vis):
        # overlap runs by one sample so the drawing has no gaps
        seg = scr[a : min(b + 1, len(scr))]
        if len(seg) < 2:
            continue
        d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in seg)
        dash = "" if visible else ' stroke-dasharray="4 3"'
        cls = "curve" if visible else "curve hidden"
        out.append(f'<path class="{cls}" d="{d}" fill="none" stroke="black" stroke-width="1.5"{dash}/>')
    if diagnostics is not None:
        for dp in diagnostics.double_points:
            (x, y), = to_screen(project(np.asarray(dp.point), projection, axis)[0])
            out.append(f'<circle class="double-point" cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="red"/>')
    e1xy, e1vis = project(E1, projection, axis)
    if e1vis[0]:
        (x, y), = to_screen(e1xy)
        out.append(f'<circle class="basepoint" cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def path_data(svg):
    """The concatenated ``d`` attributes of all paths."""
    return "|".join(re.findall(r' d="([^"]*)"', svg))


def path_digest(svg):
    return hashlib.sha256(path_data(svg).encode()).hexdigest()


def render_frames(curves, directory, stem="frame", **kwargs):
    """Write one numbered SVG per curve; returns the file paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(curves) - 1)))
    paths = []
    for i, c in enumerate(curves):
        path = directory / f"{stem}_{i:0{width}d}.svg"
        path.write_text(render_svg(c, **kwargs))
        paths.append(path)
    return paths

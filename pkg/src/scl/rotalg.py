"""Quaternion and rotation algebra on S^3 and SO(3).

Quaternions are numpy arrays whose last axis holds the coefficients
``(a, b, c, d)`` of ``a + bi + cj + dk``.  Rotations are ``(..., 3, 3)``
arrays.  Every function accepts batches along the leading axes.

The projection ``pi_project`` is the double cover S^3 -> SO(3) written out
coefficient by coefficient, so that ``pi_project(z) == pi_project(-z)``
holds bit for bit.
"""

import numpy as np

from .errors import NonUnit, NotARotation

#: tolerance on | |z| - 1 | accepted by functions that need a unit quaternion
UNIT_TOL = 1e-9
#: tolerance on the orthogonality / determinant checks of a rotation
ROTATION_TOL = 1e-10

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def quat(a, b=0.0, c=0.0, d=0.0):
    return np.array([a, b, c, d], dtype=float)


def quat_mul(p, q):
    """Hamilton product ``p q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    out = np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )
    return out


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_inv(q):
    q = np.asarray(q, dtype=float)
    return quat_conj(q) / np.sum(q * q, axis=-1, keepdims=True)


def quat_norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def check_unit(z, tol=None):
    tol = UNIT_TOL if tol is None else tol
    err = np.max(np.abs(quat_norm(z) - 1.0))
    if not err <= tol:
        raise NonUnit(f"quaternion norm deviates from 1 by {err:.3e}")


def pi_project(z, check=True):
    """Rotation matrix of the unit quaternion ``z``.

    Raises NonUnit when ``check`` is set and ``z`` is not of norm one.
    """
    z = np.asarray(z, dtype=float)
    if check:
        check_unit(z)
    a, b, c, d = np.moveaxis(z, -1, 0)
    aa, bb, cc, dd = a * a, b * b, c * c, d * d
    m = np.stack(
        [
            np.stack([aa + bb - cc - dd, -2 * a * d + 2 * b * c, 2 * a * c + 2 * b * d], -1),
            np.stack([2 * a * d + 2 * b * c, aa - bb + cc - dd, -2 * a * b + 2 * c * d], -1),
            np.stack([-2 * a * c + 2 * b * d, 2 * a * b + 2 * c * d, aa - bb - cc + dd], -1),
        ],
        axis=-2,
    )
    return m


def is_rotation(m, tol=None):
    tol = ROTATION_TOL if tol is None else tol
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (3, 3):
        return False
    eye = np.eye(3)
    orth = np.max(np.abs(np.swapaxes(m, -1, -2) @ m - eye), initial=0.0)
    det = np.max(np.abs(np.linalg.det(m) - 1.0), initial=0.0)
    return bool(orth <= tol and det <= tol)


def canonical_sign(q, eps=1e-12):
    """Flip each quaternion so that its first coefficient above ``eps`` is positive."""
    q = np.array(q, dtype=float)
    flat = q.reshape(-1, 4)
    big = np.abs(flat) > eps
    lead = np.argmax(big, axis=1)
    vals = flat[np.arange(len(flat)), lead]
    flat[vals < 0] *= -1.0
    return flat.reshape(q.shape)


def rot_to_quat(m, check=True):
    """Both preimages ``(q, -q)`` of a rotation under ``pi_project``.

    Uses the largest-diagonal branch selection, so no branch divides by a
    quantity below 1/2.  The first returned quaternion has a positive
    leading nonzero coefficient.
    """
    m = np.asarray(m, dtype=float)
    if check and not is_rotation(m):
        raise NotARotation("matrix is not in SO(3)")
    shape = m.shape[:-2]
    r = m.reshape(-1, 3, 3)
    tr = r[:, 0, 0] + r[:, 1, 1] + r[:, 2, 2]
    diag = np.stack([tr, r[:, 0, 0], r[:, 1, 1], r[:, 2, 2]], axis=1)
    branch = np.argmax(diag, axis=1)
    q = np.empty((len(r), 4))

    s10 = r[:, 1, 0] + r[:, 0, 1]
    d10 = r[:, 1, 0] - r[:, 0, 1]
    s20 = r[:, 0, 2] + r[:, 2, 0]
    d20 = r[:, 0, 2] - r[:, 2, 0]
    s21 = r[:, 2, 1] + r[:, 1, 2]
    d21 = r[:, 2, 1] - r[:, 1, 2]

    sel = branch == 0
    if sel.any():
        w = 2.0 * np.sqrt(np.maximum(1.0 + tr[sel], 0.0))  # 4a
        q[sel] = np.stack([w / 4, d21[sel] / w, d20[sel] / w, d10[sel] / w], 1)
    sel = branch == 1
    if sel.any():
        w = 2.0 * np.sqrt(np.maximum(1.0 + r[sel, 0, 0] - r[sel, 1, 1] - r[sel, 2, 2], 0.0))
        q[sel] = np.stack([d21[sel] / w, w / 4, s10[sel] / w, s20[sel] / w], 1)
    sel = branch == 2
    if sel.any():
        w = 2.0 * np.sqrt(np.maximum(1.0 - r[sel, 0, 0] + r[sel, 1, 1] - r[sel, 2, 2], 0.0))
        q[sel] = np.stack([d20[sel] / w, s10[sel] / w, w / 4, s21[sel] / w], 1)
    sel = branch == 3
    if sel.any():
        w = 2.0 * np.sqrt(np.maximum(1.0 - r[sel, 0, 0] - r[sel, 1, 1] + r[sel, 2, 2], 0.0))
        q[sel] = np.stack([d10[sel] / w, s20[sel] / w, s21[sel] / w, w / 4], 1)

    q = canonical_sign(normalize(q)).reshape(shape + (4,))
    return q, -q


def quat_exp_imaginary(v):
    """``exp(v)`` for a pure imaginary quaternion ``v`` (real part must vanish)."""
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v[..., 0]) > 1e-12):
        raise ValueError("quat_exp_imaginary expects a pure imaginary quaternion")
    vec = v[..., 1:]
    ang = np.linalg.norm(vec, axis=-1)
    safe = np.where(ang > 0, ang, 1.0)
    coef = np.where(ang > 0, np.sin(ang) / safe, 1.0)
    return np.concatenate([np.cos(ang)[..., None], vec * coef[..., None]], axis=-1)


def quat_dot(p, q):
    return np.sum(np.asarray(p, float) * np.asarray(q, float), axis=-1)


def geodesic_s3(z0, z1, t):
    """Constant speed great-circle path in S^3 from ``z0`` to ``z1``.

    For antipodal endpoints the great circle through ``z0`` and ``z0 * i``
    is used, which keeps the path deterministic.
    """
    z0 = normalize(z0)
    z1 = normalize(z1)
    t = np.asarray(t, dtype=float)
    c = float(np.clip(quat_dot(z0, z1), -1.0, 1.0))
    ang = np.arccos(c)
    if ang < 1e-14:
        return np.broadcast_to(z0, t.shape + (4,)).copy()
    perp = z1 - c * z0
    if np.linalg.norm(perp) < 1e-12:
        perp = quat_mul(z0, I)
    perp = perp / np.linalg.norm(perp)
    return np.cos(ang * t)[..., None] * z0 + np.sin(ang * t)[..., None] * perp


def axis_angle_quat(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([[np.cos(angle / 2)], np.sin(angle / 2) * axis])


def random_unit_quaternions(n, rng=None):
    rng = np.random.default_rng(rng)
    return normalize(rng.normal(size=(n, 4)))


def to_json(q):
    return [float(x) for x in np.asarray(q, dtype=float)]


def rotation_to_json(m):
    return [float(x) for x in np.asarray(m, dtype=float).reshape(9)]


def rotation_from_json(data):
    return np.asarray(data, dtype=float).reshape(3, 3)

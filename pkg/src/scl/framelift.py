"""Frame path of an immersed spherical curve and its lift to the unit quaternions."""

from dataclasses import dataclass

import numpy as np

from . import rotalg
from .curvekit import frame_derivative_from_jet, frame_from_jet

#: consecutive lift samples must have inner product above this value
GATE = np.cos(np.pi / 4)
MAX_SAMPLES = 2**20
SNAP_TOL = 1e-6


@dataclass
class LiftResult:
    ts: np.ndarray
    frames: np.ndarray
    lift: np.ndarray
    endpoint: np.ndarray

    def to_json(self):
        return {
            "ts": self.ts.tolist(),
            "lift": self.lift.tolist(),
            "endpoint": rotalg.to_json(self.endpoint),
        }

    def at(self, t):
        """Lift sample closest to the parameter ``t``."""
        return self.lift[int(np.argmin(np.abs(self.ts - t)))]


def frame_at(curve, t):
    """Frame (gamma, unit tangent, gamma x unit tangent) of ``curve`` at ``t``."""
    p, v, _ = curve.jet(t)
    out = frame_from_jet(p, v)
    return out[0] if np.ndim(t) == 0 else out


def angular_speed(p, v, a):
    """Rotation speed of the frame, i.e. the norm of its angular velocity."""
    d = frame_derivative_from_jet(p, v, a)
    return np.linalg.norm(d, axis=(-2, -1)) / np.sqrt(2.0)


def _branch(q):
    """Continuous choice of signs along a sequence of canonical quaternions."""
    dots = np.sum(q[1:] * q[:-1], axis=1)
    signs = np.concatenate([[1.0], np.cumprod(np.where(dots < 0, -1.0, 1.0))])
    return q * signs[:, None]


def lift_curve(curve, n_samples=1024, ts=None):
    """Continuous lift of the frame path, starting from the canonical preimage at t = 0.

    The grid starts uniform (or at ``ts``) and intervals are bisected until
    consecutive lift samples have inner product above cos(pi/4) and the frame
    turns by less than pi/2 across each interval according to its angular
    speed.  The latter catches intervals that alias a whole turn.
    """
    if ts is None:
        if n_samples < 64:
            raise ValueError("n_samples must be at least 64")
        ts = np.linspace(0.0, 1.0, n_samples + 1)
    ts = np.asarray(ts, dtype=float)
    p, v, a = curve._jet(ts)
    frames = frame_from_jet(p, v)
    omega = angular_speed(p, v, a)
    while True:
        q = rotalg.rot_to_quat(frames, check=False)[0]
        lift = _branch(q)
        dots = np.sum(lift[1:] * lift[:-1], axis=1)
        dt = np.diff(ts)
        bad = (dots <= GATE) | (np.maximum(omega[1:], omega[:-1]) * dt >= np.pi / 2)
        bad &= dt > 1e-15
        if not bad.any():
            break
        if len(ts) + bad.sum() > MAX_SAMPLES:
            from .errors import RefinementExceeded

            raise RefinementExceeded(f"lift needs more than {MAX_SAMPLES} samples")
        mids = 0.5 * (ts[:-1][bad] + ts[1:][bad])
        mp, mv, ma = curve._jet(mids)
        order = np.argsort(np.concatenate([ts, mids]), kind="stable")
        ts = np.concatenate([ts, mids])[order]
        frames = np.concatenate([frames, frame_from_jet(mp, mv)])[order]
        omega = np.concatenate([omega, angular_speed(mp, mv, ma)])[order]
    return LiftResult(ts=ts, frames=frames, lift=lift, endpoint=lift[-1].copy())


def snap_endpoint(z, q_end, tol=SNAP_TOL):
    """Snap ``z`` to the exact preimage of the final frame ``q_end`` when within ``tol``."""
    if np.max(np.abs(q_end - np.eye(3))) < tol:
        for cand in (rotalg.ONE, -rotalg.ONE):
            if np.linalg.norm(z - cand) < tol:
                return cand.copy()
        return z
    for cand in rotalg.rot_to_quat(q_end, check=False):
        if np.linalg.norm(z - cand) < tol:
            return cand
    return z


def component_sign(curve, n_samples=1024):
    """Endpoint of the lift, snapped to ±1 for closed curves."""
    res = lift_curve(curve, n_samples)
    return snap_endpoint(res.endpoint, res.frames[-1])


def endpoint_lift(curve, n_samples=1024):
    return component_sign(curve, n_samples)

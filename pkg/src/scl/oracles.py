"""Independent reference computations used to cross-check the fast paths."""

import numpy as np


def brute_force_crossings(curve, n_samples=4096, block=512):
    """All crossing pairs of geodesic chords, by testing every pair of chords.

    Returns a sorted list of parameter pairs (t0, t1), t0 < t1, with the
    position along each chord interpolated linearly in the parameter.
    Adjacent chords (sharing an endpoint) are skipped.
    """
    closed = curve.periodic
    ts = np.linspace(0.0, 1.0, n_samples + (0 if closed else 1), endpoint=not closed)
    p = curve.jet(ts)[0]
    if closed:
        a, b = p, np.roll(p, -1, axis=0)
        ta, tb = ts, np.append(ts[1:], 1.0)
    else:
        a, b = p[:-1], p[1:]
        ta, tb = ts[:-1], ts[1:]
    m = len(a)
    normals = np.cross(a, b)
    out = []
    for lo in range(0, m, block):
        hi = min(m, lo + block)
        i = np.arange(lo, hi)[:, None]
        j = np.arange(m)[None, :]
        # signed sides of chord j's endpoints relative to chord i's great circle and vice versa
        sa = normals[lo:hi] @ a.T
        sb = normals[lo:hi] @ b.T
        ra = a[lo:hi] @ normals.T
        rb = b[lo:hi] @ normals.T
        hit = (sa * sb < 0) & (ra * rb < 0)
        # both chords in one hemisphere, so the two great circles meet inside both
        hit &= ((a[lo:hi] + b[lo:hi]) @ (a + b).T) > 0
        adjacent = np.abs(i - j) <= 1
        if closed:
            adjacent |= np.abs(i - j) == m - 1
        hit &= ~adjacent & (j > i)
        for ii, jj in zip(*np.nonzero(hit)):
            ii += lo
            u = sa[ii - lo, jj] / (sa[ii - lo, jj] - sb[ii - lo, jj])
            w = ra[ii - lo, jj] / (ra[ii - lo, jj] - rb[ii - lo, jj])
            t0 = ta[ii] + w * (tb[ii] - ta[ii])
            t1 = ta[jj] + u * (tb[jj] - ta[jj])
            out.append((min(t0, t1), max(t0, t1)))
    return sorted(out)


def match_pairs(found, reference, tol=1e-5):
    """True when both lists have the same length and pair up within ``tol``."""
    if len(found) != len(reference):
        return False
    left = sorted(found)
    used = [False] * len(reference)
    for t0, t1 in left:
        hit = None
        for k, (r0, r1) in enumerate(reference):
            if not used[k] and abs(t0 - r0) < tol and abs(t1 - r1) < tol:
                hit = k
                break
        if hit is None:
            return False
        used[hit] = True
    return True

"""Graft loops onto a great circle, then push them to the start; frames go to demos/out/."""

from pathlib import Path

import numpy as np

from scl.curvekit import NuTheta
from scl.geomscan import is_locally_convex
from scl.render import render_frames
from scl.surgery import graft, graft_bound, push_loops_to_start

out = Path(__file__).parent / "out" / "push"
geo = NuTheta(np.pi / 2)
plan = graft_bound(geo, np.pi / 4)
print(f"plan: n={plan.n} C={plan.C:.2f} eps={plan.eps:.3f}")
print("grafted curve locally convex:", is_locally_convex(graft(geo, plan), 8192))

path = push_loops_to_start(geo, plan, steps=9)
print(f"path valid={path.valid} refinements={path.refinements} target gap={path.report['target_gap']:.1e}")
files = render_frames(path.curves, out, stem="push", n_samples=4 * 32 * plan.n)
print(f"wrote {len(files)} frames to {out}")

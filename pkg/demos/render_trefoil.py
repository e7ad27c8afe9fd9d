"""Locate the trefoil band of f1(0, .) and draw a trefoil with its double points."""

from pathlib import Path

from scl.curvekit import GeneratorF1
from scl.geomscan import scan
from scl.render import render_svg
from scl.suite import locate_trefoil_band

out = Path(__file__).parent / "out"
out.mkdir(parents=True, exist_ok=True)
band = locate_trefoil_band()
print(f"trefoil band: [{band['lower']:.12f}, {band['upper']:.12f}]")
c = GeneratorF1(0.0, band["center"])
for proj in ("orthographic", "stereographic"):
    path = out / f"trefoil_{proj}.svg"
    path.write_text(render_svg(c, scan(c), projection=proj, axis=(1.0, 0.0, 0.0), title="trefoil"))
    print(f"wrote {path}")

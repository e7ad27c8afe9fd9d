"""Component labels and detector verdicts for a handful of closed curves."""

import numpy as np

from scl import fixtures as F
from scl.classify import classify_component, is_star, is_trefoil
from scl.curvekit import GeneratorF1, NuK
from scl.geomscan import scan
from scl.suite import locate_trefoil_band

curves = [
    ("nu", NuK(1)),
    ("nu^2", NuK(2)),
    ("nu^3", NuK(3)),
    ("f1(1, 1)", GeneratorF1(1.0, 1.0)),
    ("trefoil f1(0, s2*)", GeneratorF1(0.0, locate_trefoil_band()["center"])),
    ("star k=2", F.star_curve(2)),
]

for name, c in curves:
    cls = classify_component(c)
    d = scan(c)
    print(
        f"{name:22s} z={(np.round(cls.endpoint_z, 6) + 0.0).tolist()} {cls.label:6s}"
        f" double={len(d.double_points)} triple={len(d.triple_points)}"
        f" star={is_star(c, d)[0]} trefoil={is_trefoil(c, d)[0]}"
    )

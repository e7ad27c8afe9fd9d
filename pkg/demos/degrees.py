"""Degrees of the lift of f1 (into S^3) and of g1 o f1 (into S^2) on modest grids."""

from scl.degree import degree_f1_lift, degree_g1_f1

rep = degree_f1_lift(grid=32)
print(f"f1 lift, 32^3: value={rep.value:.4f} rounded={rep.rounded} preimages={rep.extra['preimage_degree']}")

rep, slices = degree_g1_f1(grid=128)
print(f"g1 o f1, 128^2: value={rep.value:.6f} rounded={rep.rounded}")
for rb in (0.025, 0.075):
    r, _ = degree_g1_f1(grid=128, rho_bar=rb, slices=slices)
    print(f"  band width {rb}: rounded={r.rounded}")

"""Coherence ratios: why small boundary area means slow leakage.

The coherence ratio adds the retained-mass fractions of a material set and
of its complement under weak diffusion.  With no diffusion it equals 2
exactly; at small diffusivity the deficit is governed by the set's boundary
area in the averaged geometry, so among equal-mass sets the one with the
smallest boundary area is the most coherent.
"""

from mixlab import EuclideanFamily, coherence_ratio, disk, ellipse, grid_for

family = EuclideanFamily()
round_set = disk(0.8)
stretched = ellipse(1.2, 0.64 / 1.2)   # same enclosed area, longer boundary

eps_values = [0.0, 5e-4, 1e-3, 2e-3, 4e-3]
print("coherence ratio (2 = perfectly coherent) on a 10 x 10 rectangle\n")
print(f"{'eps':>10} {'disk r=0.8':>12} {'ellipse':>12}")
for eps in eps_values:
    row = f"{eps:10.1e}"
    for region in (round_set, stretched):
        grid = grid_for(region, family, max(eps, 1e-3), 384, halfwidth=5.0)
        rep = coherence_ratio(family, region, eps, backend="pde", grid=grid)
        row += f" {rep.value:12.6f}"
    print(row)

print("\nEqual masses, but the disk (shorter boundary) stays more coherent")
print("at every diffusivity; the gap scales like sqrt(eps) times the")
print("boundary-area difference.")

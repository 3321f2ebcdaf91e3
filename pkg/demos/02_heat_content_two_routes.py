"""Measure diffusive outflow two independent ways and compare.

How much mass leaks out of a material set by time one?  A conservative grid
solve of the weighted diffusion gives one answer; simulating the
time-reversed stochastic process and counting escaped endpoints gives a
second, statistically independent one.  Both should agree with each other
and, at small diffusivity, with sqrt(eps/pi) times the boundary area in the
averaged geometry.
"""

import numpy as np

from mixlab import (
    ShearFamily,
    disk,
    grid_for,
    heat_content_mc,
    mixing_area_for_family,
)
from mixlab.solver import heat_content_pde_detailed

family = ShearFamily()
region = disk(1.0)
eps = 2e-3

area = mixing_area_for_family(region, family)
prediction = np.sqrt(eps / np.pi) * area
print(f"family {family.name}, region {region.name}, eps = {eps:g}")
print(f"boundary area in the averaged geometry: {area:.6f}")
print(f"leading-order prediction sqrt(eps/pi)*A: {prediction:.6f}\n")

grid = grid_for(region, family, eps, nx=384)
value, report, _ = heat_content_pde_detailed(region, family, eps, grid)
print(f"grid route   ({grid.nx}^2 cells, {report.n_steps} steps):"
      f"  T = {value:.6f}")
print(f"   mass drift {report.mass_drift:.2e}, "
      f"solution range [{report.u_min:+.2e}, 1{report.u_max - 1:+.2e}]")

est, se = heat_content_mc(region, family, eps, n_paths=200_000,
                          n_steps=128, seed=7)
print(f"particle route (200k paths, 128 steps):  T = {est:.6f} "
      f"+- {se:.6f}")

print(f"\nroutes differ by {abs(value - est):.6f} "
      f"({abs(value - est) / (3 * se):.2f} of the 3-sigma band)")
print(f"measured / predicted = {value / prediction:.4f} (grid route)")

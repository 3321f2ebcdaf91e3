"""Extract the square-root law from a diffusivity sweep.

Outflow measurements T(eps) over a geometric ladder of diffusivities are
fitted with T = c1 sqrt(eps) + c2 eps; the coefficient c1 times sqrt(pi)
should land on the boundary area of the region in the averaged geometry.
Run with --plot to save a log-log figure next to this script.
"""

import argparse

import numpy as np

from mixlab import (
    EuclideanFamily,
    RotatingGyreFamily,
    ellipse,
    fit_asymptotics,
    grid_for,
    heat_content_pde,
    mixing_area_for_family,
)

parser = argparse.ArgumentParser()
parser.add_argument("--plot", action="store_true",
                    help="save sqrt_law.png next to this script")
args = parser.parse_args()

family = RotatingGyreFamily()
region = ellipse(0.9, 0.45)
eps_grid = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4]

area = mixing_area_for_family(region, family)
grid = grid_for(region, family, max(eps_grid), nx=384)
print(f"family {family.name}, region {region.name}")
print(f"boundary area in the averaged geometry: {area:.6f}")
flat = mixing_area_for_family(region, EuclideanFamily())
print(f"(the flat-geometry boundary length would be {flat:.6f})\n")

measurements = []
print(f"{'eps':>12} {'T':>12} {'prediction':>12} {'ratio':>8}")
for eps in eps_grid:
    value = heat_content_pde(region, family, eps, grid)
    measurements.append((eps, value, None))
    pred = np.sqrt(eps / np.pi) * area
    print(f"{eps:12.4e} {value:12.6f} {pred:12.6f} {value / pred:8.4f}")

fit = fit_asymptotics(measurements, area)
print(f"\nfit: T = {fit.c1:.6f} sqrt(eps) {fit.c2:+.4f} eps")
print(f"c1 * sqrt(pi) = {fit.c1 * np.sqrt(np.pi):.6f} vs area {area:.6f}")
print(f"relative gap: {fit.relative_gap:.3%}")

if args.plot:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    eps = fit.eps_values
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, fit.values, "o", label="measured outflow")
    fine = np.geomspace(eps.min(), eps.max(), 100)
    ax.loglog(fine, np.sqrt(fine / np.pi) * area, "-",
              label="sqrt(eps/pi) * area")
    ax.loglog(fine, fit.c1 * np.sqrt(fine) + fit.c2 * fine, "--",
              label="two-term fit")
    ax.set_xlabel("diffusivity")
    ax.set_ylabel("outflow by time 1")
    ax.legend()
    fig.tight_layout()
    out = Path(__file__).with_name("sqrt_law.png")
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")

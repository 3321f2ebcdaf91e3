"""Verification suites: one per headline claim, shared by CLI and tests.

Each suite runs a pinned desk-scale configuration, asserts its tolerance,
and returns a JSON-ready report.  ``run_suites`` executes any subset, adds
the cross-suite conservation/positivity audit, writes reports, and prints
one pass/fail line per criterion.
"""

from __future__ import annotations

import numpy as np

from .analysis import fit_asymptotics
from .coefficients import constant_coefficients
from .errors import ConfigError
from .families import (
    EuclideanFamily,
    RotatingGyreFamily,
    ShearFamily,
)
from .grid import Grid, GridField, grid_for
from .mixing_area import mixing_area_for_family
from .pde_checks import (
    averaging_order_check,
    localisation_check,
    self_adjoint_identity_check,
)
from .regions import disk, ellipse
from .reporting import write_csv, write_json, write_run_metadata
from .sde import derive_seeds, euler_maruyama, point_mass_law, sde_spec_for_family
from .sde_stats import heat_content_mc, law_equality_check, strong_error
from .solver import evolve, heat_content_pde_detailed

__all__ = ["SUITES", "run_suites", "suite_names"]

EPS_LADDER = (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4)

# allowance for the grid route's own discretization error when comparing
# against Monte Carlo values (matches the nx=512 accuracy of the solver)
PDE_TOLERANCE = 0.02


def _solve_record(report, indicator_data: bool, label: str) -> dict:
    return {
        "label": label,
        "mass_drift": report.mass_drift,
        "u_min": report.u_min,
        "u_max": report.u_max,
        "n_steps": report.n_steps,
        "indicator_data": indicator_data,
    }


def _fit_table(measurements, area):
    rep = fit_asymptotics(measurements, area)
    rows = [(e, v, s if s is not None else "",
             np.sqrt(e / np.pi) * area,
             v / (np.sqrt(e / np.pi) * area) - 1.0)
            for (e, v, s) in measurements]
    return rep, rows


def _sqrt_law_suite(family, region, seed, n_paths, n_steps_mc, nx=512):
    """Shared machinery for the static and dynamic sqrt-law suites."""
    area = mixing_area_for_family(region, family)
    grid = grid_for(region, family, max(EPS_LADDER), nx)
    solves = []
    pde_meas = []
    for eps in EPS_LADDER:
        value, rep, _ = heat_content_pde_detailed(region, family, eps, grid)
        pde_meas.append((eps, value, None))
        solves.append(_solve_record(rep, True, f"heat content eps={eps:g}"))
    pde_fit, pde_rows = _fit_table(pde_meas, area)

    mc_meas = []
    agreement = []
    for eps, child in zip(EPS_LADDER, derive_seeds(seed, len(EPS_LADDER))):
        est, se = heat_content_mc(region, family, eps, n_paths, n_steps_mc,
                                  child)
        mc_meas.append((eps, est, se))
    mc_fit, mc_rows = _fit_table(mc_meas, area)
    for (eps, t_pde, _), (_, t_mc, se) in zip(pde_meas, mc_meas):
        agreement.append(bool(abs(t_pde - t_mc)
                              <= 3 * se + PDE_TOLERANCE * t_pde))

    pde_ok = pde_fit.relative_gap <= 0.05
    mc_ok = abs(mc_fit.c1 - area / np.sqrt(np.pi)) <= 3 * mc_fit.c1_se
    details = {
        "area": area,
        "prediction_c1": area / np.sqrt(np.pi),
        "pde": {"c1": pde_fit.c1, "c2": pde_fit.c2,
                "relative_gap": pde_fit.relative_gap, "nx": nx,
                "halfwidth": grid.x_max},
        "mc": {"c1": mc_fit.c1, "c1_se": mc_fit.c1_se, "c2": mc_fit.c2,
               "relative_gap": mc_fit.relative_gap,
               "n_paths": n_paths, "n_steps": n_steps_mc},
        "pde_within_5pct": bool(pde_ok),
        "mc_within_3se": bool(mc_ok),
        "routes_agree_per_eps": agreement,
    }
    passed = bool(pde_ok and mc_ok and all(agreement))
    return passed, details, solves, pde_rows, mc_rows


def suite_sqrt_law_static(seed: int, out_dir=None) -> dict:
    """Criterion 1: flat geometry, unit disk, both routes against 2 pi."""
    family = EuclideanFamily()
    region = disk(1.0)
    passed, details, solves, pde_rows, mc_rows = _sqrt_law_suite(
        family, region, seed, n_paths=1_000_000, n_steps_mc=64)
    if out_dir is not None:
        write_csv(out_dir / "sqrt_law_static_pde.csv",
                  ["epsilon", "T", "sigma_T", "prediction", "gap"], pde_rows)
        write_csv(out_dir / "sqrt_law_static_mc.csv",
                  ["epsilon", "T", "sigma_T", "prediction", "gap"], mc_rows)
    return {"criterion": 1, "name": "sqrt-law-static", "passed": passed,
            "headline": (f"c1*sqrt(pi) gap: pde {details['pde']['relative_gap']:.3%}, "
                         f"mc {details['mc']['relative_gap']:.3%}"),
            "details": details, "solves": solves}


def suite_sqrt_law_dynamic(seed: int, out_dir=None) -> dict:
    """Criterion 2: time-dependent families against the mixing boundary area."""
    configs = [
        ("shear", ShearFamily(), disk(1.0)),
        ("gyre", RotatingGyreFamily(), ellipse(0.9, 0.45)),
    ]
    sub = {}
    solves = []
    passed = True
    for (label, family, region), child in zip(configs, derive_seeds(seed, 2)):
        ok, details, sv, pde_rows, mc_rows = _sqrt_law_suite(
            family, region, child, n_paths=200_000, n_steps_mc=128)
        sub[label] = details
        solves.extend(sv)
        passed = passed and ok
        if out_dir is not None:
            write_csv(out_dir / f"sqrt_law_dynamic_{label}_pde.csv",
                      ["epsilon", "T", "sigma_T", "prediction", "gap"],
                      pde_rows)
            write_csv(out_dir / f"sqrt_law_dynamic_{label}_mc.csv",
                      ["epsilon", "T", "sigma_T", "prediction", "gap"],
                      mc_rows)
    headline = ", ".join(
        f"{k}: pde {v['pde']['relative_gap']:.3%} / mc {v['mc']['relative_gap']:.3%}"
        for k, v in sub.items())
    return {"criterion": 2, "name": "sqrt-law-dynamic", "passed": bool(passed),
            "headline": headline, "details": sub, "solves": solves}


def _averaging_bump(grid: Grid) -> GridField:
    ctr = grid.centers()
    r2 = ctr[..., 0] ** 2 + ctr[..., 1] ** 2
    r = np.sqrt(r2)
    cut = np.zeros_like(r)
    inside = r < 2.0
    cut[inside] = np.exp(1.0 - 1.0 / (1.0 - (r[inside] / 2.0) ** 2))
    vals = np.exp(-r2 / (2.0 * 0.8 ** 2)) * cut
    return GridField(vals, grid, np.ones(vals.shape))


def suite_averaging(seed: int, out_dir=None) -> dict:
    """Criterion 3: second-order closeness of the averaged evolution.

    On the plateau of the shear family the per-time operators commute with
    the averaged one wherever the initial bump lives, so the measured gap
    decays even faster than the guaranteed second order; the slope bound is
    one-sided.  The expansion series (first-order generator check) runs on a
    smaller diffusivity grid where its quadratic regime has set in.
    """
    family = ShearFamily()
    grid = Grid(-4.0, 4.0, -4.0, 4.0, 256, 256)
    u0 = _averaging_bump(grid)
    eps_list = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    rep = averaging_order_check(u0, family, eps_list)
    solves = [_solve_record(r, False, f"averaging solve {i}")
              for i, r in enumerate(rep.solve_reports)]
    passed = (not rep.skipped and rep.slope >= 1.8
              and rep.expansion_slope >= 1.8)
    details = {
        "eps": list(rep.eps_values),
        "differences": list(rep.differences),
        "slope": rep.slope,
        "expansion_eps": list(rep.expansion_eps_values),
        "expansion_residuals": list(rep.expansion_residuals),
        "expansion_slope": rep.expansion_slope,
    }
    if out_dir is not None:
        write_csv(out_dir / "averaging_order.csv",
                  ["epsilon", "linf_difference"],
                  list(zip(rep.eps_values, rep.differences)))
    return {"criterion": 3, "name": "averaging", "passed": bool(passed),
            "headline": (f"slope {rep.slope:.2f}, expansion slope "
                         f"{rep.expansion_slope:.2f}"),
            "details": details, "solves": solves}


def suite_commuting(seed: int, out_dir=None) -> dict:
    """Criterion 4: commuting spatially-constant coefficients identity."""
    def a_of_t(t):
        return 2.0 * np.array(
            [[1.0 + 0.4 * np.sin(np.pi * t) ** 2, 0.2 * np.sin(np.pi * t)],
             [0.2 * np.sin(np.pi * t), 1.0]])

    from numpy.polynomial.legendre import leggauss
    x, w = leggauss(32)
    abar = sum(wi * a_of_t(0.5 * (xi + 1)) for xi, wi in zip(x, 0.5 * w))

    grid = Grid(-4.0, 4.0, -4.0, 4.0, 128, 128)
    ctr = grid.centers()
    vals = np.exp(-(ctr[..., 0] ** 2 + ctr[..., 1] ** 2) / (2 * 0.5 ** 2))
    u0 = GridField(vals, grid, np.ones(vals.shape))
    rep_t = evolve(u0, constant_coefficients(a_of_t), 1e-2, n_steps=256,
                   time_sampling="step_average")
    rep_a = evolve(u0, constant_coefficients(lambda t: abar,
                                             time_dependent=False),
                   1e-2, n_steps=256)
    gap = float(np.linalg.norm(rep_t.final.values - rep_a.final.values)
                / np.linalg.norm(rep_a.final.values))
    passed = gap <= 1e-8
    solves = [_solve_record(rep_t, False, "time-dependent"),
              _solve_record(rep_a, False, "averaged")]
    return {"criterion": 4, "name": "commuting", "passed": bool(passed),
            "headline": f"relative L2 gap {gap:.2e}",
            "details": {"relative_l2_gap": gap, "eps": 1e-2,
                        "n_steps": 256},
            "solves": solves}


def suite_appendix_a(seed: int, out_dir=None) -> dict:
    """Criterion 5: coupled strong error stays quadratic in diffusivity.

    The start point sits mid-way through a wide shear transition zone, so
    freezing the diffusion matrix at the start genuinely perturbs the paths
    while the coefficient gradient stays nearly constant over the sampled
    range even at the largest diffusivity.  Boundedness of the
    checkpoint-max of E|X - Y|^2 / eps^2 is tested as non-growth toward
    small diffusivity: each halving may raise the ratio by at most 25% plus
    Monte Carlo error.  A gap of lower order eps^p with p < 2 would raise it
    by 2^(2-p) per halving (41% already at p = 3/2), so the test separates
    the quadratic rate from its neighbours.
    """
    family = ShearFamily(plateau_radius=2.0, outer_radius=6.0)
    law = point_mass_law((3.5, 0.0))
    eps_values = (0.1, 0.05, 0.025)
    checkpoints = np.linspace(0.0, 1.0, 17)
    n_paths, n_steps = 100_000, 256
    ratios = []
    ratio_ses = []
    for eps, child in zip(eps_values, derive_seeds(seed, len(eps_values))):
        spec_x = sde_spec_for_family(family, eps)
        spec_y = sde_spec_for_family(family, eps, frozen=True)
        ens_x = euler_maruyama(spec_x, law, n_paths, n_steps, child,
                               checkpoint_times=checkpoints)
        ens_y = euler_maruyama(spec_y, law, n_paths, n_steps, child,
                               checkpoint_times=checkpoints)
        rep = strong_error(ens_x, ens_y)
        ratios.append(rep.max_mean_sq_gap / eps ** 2)
        ratio_ses.append(rep.se_at_max / eps ** 2)
    growth_ok = all(
        ratios[i + 1] <= 1.25 * ratios[i]
        + 3 * (ratio_ses[i] + ratio_ses[i + 1])
        for i in range(len(ratios) - 1))
    details = {
        "eps": list(eps_values),
        "ratio_over_eps_sq": ratios,
        "ratio_se": ratio_ses,
        "exhibited_constant": max(r + 3 * s
                                  for r, s in zip(ratios, ratio_ses)),
        "n_paths": n_paths,
        "n_steps": n_steps,
        "checkpoints": len(checkpoints),
        "start_point": [3.5, 0.0],
    }
    return {"criterion": 5, "name": "appendixA", "passed": bool(growth_ok),
            "headline": ("E|X-Y|^2/eps^2 in ["
                         f"{min(ratios):.3f}, {max(ratios):.3f}]"),
            "details": details, "solves": []}


def suite_law(seed: int, out_dir=None) -> dict:
    """Criterion 6: the two frozen surrogates share the Gaussian law."""
    rep = law_equality_check(ShearFamily(), (0.0, 0.0), 0.01,
                             n_paths=100_000, seed=seed, n_steps=1024)
    details = {
        "target_cov": rep.target_cov,
        "cov_a": rep.cov_a,
        "cov_b": rep.cov_b,
        "mean_a": rep.mean_a,
        "mean_b": rep.mean_b,
        "ks_pvalues": rep.ks_pvalues,
        "gaussian_pvalues": rep.gaussian_pvalues,
        "cov_ok": rep.cov_ok,
        "mean_ok": rep.mean_ok,
        "ks_ok": rep.ks_ok,
        "gaussian_ok": rep.gaussian_ok,
    }
    passed = bool(rep.passed) and rep.gaussian_ok
    return {"criterion": 6, "name": "law", "passed": passed,
            "headline": (f"KS p >= {float(np.min(rep.ks_pvalues)):.3f}, "
                         f"cov ok {rep.cov_ok}"),
            "details": details, "solves": []}


def suite_selfadjoint(seed: int, out_dir=None) -> dict:
    """Criterion 7: outflow symmetry identity on the shear family."""
    family = ShearFamily()
    region = disk(1.0)
    grid = grid_for(region, family, 1e-3, 512)
    rep = self_adjoint_identity_check(region, family, 1e-3, grid)
    solves = [_solve_record(r, True, f"selfadjoint solve {i}")
              for i, r in enumerate(rep.solve_reports)]
    passed = rep.relative_gap <= 1e-4
    return {"criterion": 7, "name": "selfadjoint", "passed": bool(passed),
            "headline": f"relative gap {rep.relative_gap:.2e}",
            "details": {"lhs": rep.lhs, "rhs": rep.rhs,
                        "relative_gap": rep.relative_gap, "eps": 1e-3},
            "solves": solves}


def suite_localisation(seed: int, out_dir=None) -> dict:
    """Criterion 8: far-field leakage decays below linear order."""
    family = EuclideanFamily()
    grid = grid_for(disk(1.0), family, 1e-2, 384, halfwidth=3.0)
    eps_list = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    rep = localisation_check(disk(0.5), disk(1.0), family, eps_list, grid)
    solves = [_solve_record(r, True, f"localisation eps={e:g}")
              for e, r in zip(eps_list, rep.solve_reports)]
    factors = [float(rep.ratios[i] / rep.ratios[i + 1])
               for i in range(len(eps_list) - 1)]
    # halvings landing at or below 2.5e-3 must at least halve the ratio
    small = [f for f, e in zip(factors, eps_list[1:]) if e <= 2.5e-3]
    halving_ok = all(f >= 2.0 for f in small)
    passed = rep.passed and halving_ok
    details = {
        "eps": list(eps_list),
        "values": list(rep.values),
        "ratios": list(rep.ratios),
        "halving_factors": factors,
        "monotone": rep.monotone_decreasing,
        "final_fraction": rep.final_fraction,
        "final_fraction_bound": rep.final_fraction_bound,
    }
    return {"criterion": 8, "name": "localisation", "passed": bool(passed),
            "headline": (f"ratio falls {rep.ratios[0] / rep.ratios[-1]:.1e}x "
                         "over the ladder"),
            "details": details, "solves": solves}


def conservation_audit(reports: list) -> dict:
    """Criterion 9: mass conservation and range bounds across suites 1-8."""
    drifts = []
    mins = []
    maxs = []
    count = 0
    for rep in reports:
        for sv in rep.get("solves", []):
            count += 1
            drifts.append(sv["mass_drift"])
            if sv["indicator_data"]:
                mins.append(sv["u_min"])
                maxs.append(sv["u_max"])
    passed = (all(d <= 1e-12 for d in drifts)
              and all(m >= -1e-10 for m in mins)
              and all(m <= 1 + 1e-10 for m in maxs))
    return {"criterion": 9, "name": "conservation", "passed": bool(passed),
            "headline": (f"{count} solves, worst drift "
                         f"{max(drifts) if drifts else 0:.2e}, range "
                         f"[{min(mins) if mins else 0:+.1e}, "
                         f"1{max(maxs) - 1 if maxs else 0:+.1e}]"),
            "details": {"n_solves": count,
                        "worst_drift": max(drifts) if drifts else 0.0,
                        "worst_min": min(mins) if mins else 0.0,
                        "worst_max": max(maxs) if maxs else 1.0},
            "solves": []}


SUITES = {
    "sqrt-law-static": suite_sqrt_law_static,
    "sqrt-law-dynamic": suite_sqrt_law_dynamic,
    "averaging": suite_averaging,
    "commuting": suite_commuting,
    "appendixA": suite_appendix_a,
    "strong-error": suite_appendix_a,     # descriptive alias
    "law": suite_law,
    "selfadjoint": suite_selfadjoint,
    "localisation": suite_localisation,
}

_ALL_ORDER = ("sqrt-law-static", "sqrt-law-dynamic", "averaging", "commuting",
              "appendixA", "law", "selfadjoint", "localisation")


def suite_names() -> list:
    return list(_ALL_ORDER) + ["strong-error", "all"]


def run_suites(which: str, seed: int, out_dir=None, echo=print) -> dict:
    """Run one suite or all of them; write reports; return the summary."""
    if which == "all":
        names = list(_ALL_ORDER)
    elif which in SUITES:
        names = [which]
    else:
        raise ConfigError(f"unknown suite {which!r}; "
                          f"known: {', '.join(suite_names())}")

    seeds = derive_seeds(seed, len(_ALL_ORDER))
    seed_of = dict(zip(_ALL_ORDER, seeds))
    reports = []
    for name in names:
        canonical = "appendixA" if name == "strong-error" else name
        rep = SUITES[canonical](seed_of[canonical], out_dir=out_dir)
        reports.append(rep)
        if out_dir is not None:
            write_json(rep, out_dir / f"suite_{rep['name']}.json")

    if which == "all":
        audit = conservation_audit(reports)
        reports.append(audit)
        if out_dir is not None:
            write_json(audit, out_dir / "suite_conservation.json")

    summary = {
        "seed": seed,
        "suites": [{"criterion": r["criterion"], "name": r["name"],
                    "passed": r["passed"], "headline": r["headline"]}
                   for r in reports],
        "all_passed": bool(all(r["passed"] for r in reports)),
    }
    if out_dir is not None:
        write_json(summary, out_dir / "summary.json")
        write_run_metadata(out_dir, {"command": f"verify --suite {which}",
                                     "seed": seed})
    for r in reports:
        status = "PASS" if r["passed"] else "FAIL"
        echo(f"[criterion {r['criterion']}] {status} {r['name']}: "
             f"{r['headline']}")
    return summary

"""Post-processing: square-root asymptotics fits and coherence ratios."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import coefficients
from .errors import ConfigError, SolverError
from .families import MetricFamily
from .grid import Grid, discretize_indicator
from .regions import Region, rectangle_region
from .sde import (
    _probe_bound,
    derive_seeds,
    euler_maruyama,
    indicator_law,
    region_mass,
    rejection_law,
    sde_spec_for_family,
)
from .solver import evolve

__all__ = [
    "AsymptoticsReport",
    "fit_asymptotics",
    "CoherenceReport",
    "coherence_ratio",
]


class FitError(np.linalg.LinAlgError):
    """Weighted least squares could not be solved (collinear design)."""


@dataclass
class AsymptoticsReport:
    """Fit of measured outflow T(eps) = c1 sqrt(eps) + c2 eps."""

    eps_values: np.ndarray
    values: np.ndarray
    sigmas: np.ndarray | None
    c1: float
    c2: float
    cov: np.ndarray              # 2x2 covariance of (c1, c2)
    prediction: float            # sqrt(1/pi) * boundary area
    area: float
    relative_gap: float          # |c1 sqrt(pi) - area| / area
    residuals: np.ndarray

    @property
    def c1_se(self) -> float:
        return float(np.sqrt(self.cov[0, 0]))

    @property
    def c2_se(self) -> float:
        return float(np.sqrt(self.cov[1, 1]))


def fit_asymptotics(measurements, area: float) -> AsymptoticsReport:
    """Weighted least squares of T = c1 sqrt(eps) + c2 eps.

    ``measurements`` is a sequence of (eps, value, sigma) triples; sigma may
    be None for deterministic (grid) measurements, in which case the fit is
    unweighted and the parameter covariance is scaled by the residual
    variance.  ``area`` is the geometric boundary area; the report carries
    the prediction sqrt(1/pi) * area and the relative gap of c1 against it.
    """
    rows = [(float(e), float(v), None if s is None else float(s))
            for e, v, s in measurements]
    if len(rows) < 4:
        raise ConfigError("need at least 4 measurements to fit")
    rows.sort(key=lambda r: -r[0])
    eps = np.array([r[0] for r in rows])
    if np.any(np.diff(eps) >= 0):
        raise ConfigError("diffusivities must be distinct")
    if eps[0] / eps[-1] < 10.0 * (1 - 1e-9):
        raise ConfigError("measurements must span at least one decade")
    values = np.array([r[1] for r in rows])
    sig_list = [r[2] for r in rows]
    weighted = all(s is not None for s in sig_list)
    if not weighted and any(s is not None for s in sig_list):
        raise ConfigError("pass sigmas for all measurements or for none")

    design = np.column_stack([np.sqrt(eps), eps])
    if weighted:
        sigmas = np.array(sig_list)
        if np.any(sigmas <= 0):
            raise ConfigError("measurement sigmas must be positive")
        w = 1.0 / sigmas
        xw = design * w[:, None]
        yw = values * w
    else:
        sigmas = None
        xw, yw = design, values

    gram = xw.T @ xw
    if np.linalg.cond(gram) > 1e13:
        raise FitError("singular normal equations: collinear design")
    params = np.linalg.solve(gram, xw.T @ yw)
    residuals = values - design @ params
    if weighted:
        cov = np.linalg.inv(gram)
    else:
        dof = len(eps) - 2
        scale = float(residuals @ residuals) / dof if dof > 0 else 0.0
        cov = scale * np.linalg.inv(gram)

    prediction = area / np.sqrt(np.pi)
    gap = abs(params[0] * np.sqrt(np.pi) - area) / area
    return AsymptoticsReport(
        eps_values=eps, values=values, sigmas=sigmas,
        c1=float(params[0]), c2=float(params[1]), cov=cov,
        prediction=float(prediction), area=float(area),
        relative_gap=float(gap), residuals=residuals)


@dataclass
class CoherenceReport:
    """Retained-mass fractions of a material set and its complement.

    The complement lives on the truncated computational rectangle, so the
    second term depends on the reported truncation half-width.
    """

    value: float                 # sum of the two fractions
    fraction_set: float
    fraction_complement: float
    mass_set: float
    mass_complement: float
    truncation_halfwidth: float
    backend: str
    eps: float
    standard_error: float | None = None
    solve_reports: list = field(default_factory=list)


def _coherence_pde(family, region, eps, grid, **evolve_kwargs):
    u_s = discretize_indicator(region, grid, family)
    m_s = u_s.mass()
    m_c = u_s.copy_with(1.0 - u_s.values).mass()
    if eps == 0.0:
        return 1.0, 1.0, m_s, m_c, None, []
    coeffs = coefficients(family)
    rep = evolve(u_s, coeffs, eps, **evolve_kwargs)
    outflow = rep.final.weighted_inner(1.0 - u_s.values)
    # mass conservation and the discrete symmetry identity give
    # <P 1_c, 1_c> = m_c - <P 1_c, 1_s> = m_c - <P 1_s, 1_c>, so one solve
    # determines both retained fractions
    frac_s = (m_s - outflow) / m_s
    frac_c = (m_c - outflow) / m_c
    return frac_s, frac_c, m_s, m_c, None, [rep]


def _coherence_mc(family, region, eps, grid, n_paths, n_steps, seed):
    law_s = indicator_law(region, family)
    bbox = (grid.x_min, grid.x_max, grid.y_min, grid.y_max)
    if family.has_unit_density:
        mass_box = (grid.x_max - grid.x_min) * (grid.y_max - grid.y_min)
        bound = 1.0

        def accept_complement(pts):
            return (~region.contains(pts)).astype(float)
    else:
        box = rectangle_region(*bbox)
        mass_box = region_mass(box, family.density)
        bound = _probe_bound(bbox, family.density)

        def accept_complement(pts):
            dens = np.asarray(family.density(pts), dtype=float)
            return ~region.contains(pts) * dens

    mass_c = mass_box - law_s.mass
    if eps == 0.0:
        return 1.0, 1.0, law_s.mass, mass_c, 0.0, []
    law_c = rejection_law(bbox, accept_complement, bound, mass_c,
                          "complement law on truncation box")
    seed_s, seed_c = derive_seeds(seed, 2)
    spec = sde_spec_for_family(family, eps, time_reversed=True)
    ens_s = euler_maruyama(spec, law_s, n_paths, n_steps, seed_s)
    ens_c = euler_maruyama(spec, law_c, n_paths, n_steps, seed_c)
    p_s = float(np.mean(np.asarray(region.contains(ens_s.endpoints),
                                   dtype=bool)))
    p_c = float(np.mean(~np.asarray(region.contains(ens_c.endpoints),
                                    dtype=bool)))
    se = float(np.hypot(np.sqrt(p_s * (1 - p_s) / n_paths),
                        np.sqrt(p_c * (1 - p_c) / n_paths)))
    return p_s, p_c, law_s.mass, mass_c, se, []


def coherence_ratio(family: MetricFamily, region: Region, eps: float,
                    backend: str = "pde", grid: Grid | None = None,
                    n_paths: int = 200_000, n_steps: int = 256,
                    seed: int = 0, **evolve_kwargs) -> CoherenceReport:
    """Sum of retained-mass fractions of a material set and its complement.

    With no diffusion both fractions equal one and the value is exactly 2.
    The complement is truncated to the computational rectangle (its mass on
    the plane is infinite); the rectangle half-width is reported.
    """
    if grid is None:
        raise ConfigError("coherence_ratio needs an explicit grid")
    if backend == "pde":
        frac_s, frac_c, m_s, m_c, se, reps = _coherence_pde(
            family, region, eps, grid, **evolve_kwargs)
    elif backend == "mc":
        frac_s, frac_c, m_s, m_c, se, reps = _coherence_mc(
            family, region, eps, grid, n_paths, n_steps, seed)
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    tol = 1e-9
    if not (-tol <= frac_s <= 1 + tol and -tol <= frac_c <= 1 + tol):
        raise SolverError("retained fractions escaped [0, 1]")
    return CoherenceReport(
        value=frac_s + frac_c, fraction_set=frac_s,
        fraction_complement=frac_c, mass_set=m_s, mass_complement=m_c,
        truncation_halfwidth=float(grid.x_max), backend=backend, eps=eps,
        standard_error=se, solve_reports=reps)

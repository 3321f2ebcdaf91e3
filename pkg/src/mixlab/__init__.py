"""mixlab: desk-scale numerics for diffusive transport in the geometry of mixing.

Two independent routes (a conservative grid solver and a Monte Carlo SDE
engine) measure the mass that diffuses out of a material set over unit time,
and both are cross-checked against the closed-form geometric prediction
sqrt(eps/pi) * (boundary area in the time-averaged weighted geometry).
"""

from .analysis import (
    AsymptoticsReport,
    CoherenceReport,
    coherence_ratio,
    fit_asymptotics,
)
from .coefficients import (
    CoefficientField,
    averaged_coefficients,
    coefficients,
    constant_coefficients,
)
from .errors import ConfigError, GeometryError, SimulationError, SolverError
from .families import (
    DiagTimeFamily,
    EuclideanFamily,
    MetricFamily,
    PullbackFamily,
    RotatingGyreFamily,
    ShearFamily,
    averaged_inverse_metric,
    averaged_metric,
    make_family,
    pullback_family,
)
from .grid import Grid, GridField, discretize_indicator, grid_for
from .mixing_area import mixing_area, mixing_area_for_family
from .pde_checks import (
    averaging_order_check,
    localisation_check,
    self_adjoint_identity_check,
)
from .regions import (
    Region,
    disk,
    ellipse,
    polygon_region,
    rectangle_region,
    region_area,
    square,
    validate_region,
)
from .sde import (
    InitialLaw,
    PathEnsemble,
    SdeSpec,
    euler_maruyama,
    indicator_law,
    point_mass_law,
    sde_spec_for_family,
    weighted_indicator_law,
)
from .sde_stats import heat_content_mc, law_equality_check, strong_error
from .solver import SolveReport, apply_operator, evolve, heat_content_pde
from .spd import SPD2

__version__ = "0.1.0"

__all__ = [
    "SPD2",
    "MetricFamily", "EuclideanFamily", "DiagTimeFamily", "ShearFamily",
    "RotatingGyreFamily", "PullbackFamily", "pullback_family", "make_family",
    "averaged_metric", "averaged_inverse_metric",
    "CoefficientField", "coefficients", "averaged_coefficients",
    "constant_coefficients",
    "Region", "disk", "ellipse", "square", "rectangle_region",
    "polygon_region", "validate_region", "region_area",
    "mixing_area", "mixing_area_for_family",
    "Grid", "GridField", "grid_for", "discretize_indicator",
    "SolveReport", "evolve", "apply_operator", "heat_content_pde",
    "averaging_order_check", "self_adjoint_identity_check",
    "localisation_check",
    "SdeSpec", "PathEnsemble", "InitialLaw", "euler_maruyama",
    "sde_spec_for_family", "point_mass_law", "indicator_law",
    "weighted_indicator_law",
    "heat_content_mc", "strong_error", "law_equality_check",
    "AsymptoticsReport", "CoherenceReport", "fit_asymptotics",
    "coherence_ratio",
    "GeometryError", "SolverError", "SimulationError", "ConfigError",
]

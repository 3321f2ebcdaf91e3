"""Boundary area of a region in the averaged weighted geometry.

For a curve oriented counter-clockwise with tangent c'(s), the outer normal
nu is the metric-unit vector that is metric-orthogonal to the tangent, and
the area element is rho * det[nu, c'(s)] ds.  The total is the quantity that
controls the leading-order mass flux out of the region at small diffusivity;
the weighted variant integrates an additional scalar factor along the curve.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import GeometryError
from .families import MetricFamily, averaged_metric_field
from .regions import Region
from .spd import validate_spd

__all__ = ["mixing_area", "mixing_area_for_family", "unit_outer_normal"]

_GL_NODES, _GL_WEIGHTS = leggauss(4)


def _panelize(region: Region, boundary_nodes: int):
    """Split [0, 1] into quadrature panels aligned with boundary corners."""
    if boundary_nodes < 1:
        raise GeometryError("boundary_nodes must be >= 1")
    if not region.corners:
        edges = np.linspace(0.0, 1.0, boundary_nodes + 1)
        return list(zip(edges[:-1], edges[1:]))
    breaks = sorted({0.0, *region.corners}) + [1.0]
    panels = []
    for s0, s1 in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(round(boundary_nodes * (s1 - s0))))
        edges = np.linspace(s0, s1, n + 1)
        panels.extend(zip(edges[:-1], edges[1:]))
    return panels


def unit_outer_normal(gbar: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    """Metric-unit outer normal for a CCW tangent under metric gbar.

    Solves nu^T gbar c' = 0 with nu^T gbar nu = 1 and outward orientation;
    construction: nu = gbar^{-1} n / sqrt(n^T gbar^{-1} n) with n the
    Euclidean outer normal (c'_y, -c'_x).
    """
    n = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
    d = gbar[..., 0, 0] * gbar[..., 1, 1] - gbar[..., 0, 1] ** 2
    ginv_n = np.empty_like(n)
    ginv_n[..., 0] = (gbar[..., 1, 1] * n[..., 0] - gbar[..., 0, 1] * n[..., 1]) / d
    ginv_n[..., 1] = (gbar[..., 0, 0] * n[..., 1] - gbar[..., 0, 1] * n[..., 0]) / d
    norm = np.sqrt(np.einsum("...i,...i->...", n, ginv_n))
    return ginv_n / norm[..., None]


def mixing_area(region: Region, gbar, rho, boundary_nodes: int = 256,
                weight=None) -> float:
    """Integral of rho * |det[nu, c']| (optionally times a weight) over the boundary.

    Parameters
    ----------
    region : Region
        Region whose boundary is integrated.
    gbar : callable
        pts -> stack of SPD matrices; the averaged metric along the curve.
    rho : callable or None
        pts -> positive mass density; None means density 1.
    boundary_nodes : int
        Number of composite quadrature panels (4-point Gauss per panel).
    weight : callable or None
        Optional scalar factor pts -> (...) integrated against the area form.
    """
    total = 0.0
    for s0, s1 in _panelize(region, boundary_nodes):
        mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
        s = mid + half * _GL_NODES
        p = region.curve(s)
        dp = region.tangent(s)
        speed = np.hypot(dp[..., 0], dp[..., 1])
        if np.any(speed < 1e-14):
            raise GeometryError("degenerate tangent on boundary")
        g = np.asarray(gbar(p), dtype=float)
        validate_spd(g, "averaged metric on the boundary")
        nu = unit_outer_normal(g, dp)
        dens = np.ones_like(speed) if rho is None else np.asarray(rho(p), float)
        if np.any(dens <= 0):
            raise GeometryError("density must be positive on the boundary")
        f = np.abs(nu[..., 0] * dp[..., 1] - nu[..., 1] * dp[..., 0]) * dens
        if weight is not None:
            f = f * np.asarray(weight(p), dtype=float)
        total += half * float(np.dot(_GL_WEIGHTS, f))
    return total


def mixing_area_for_family(region: Region, family: MetricFamily,
                           boundary_nodes: int = 256,
                           quadrature_nodes: int = 16,
                           weight=None) -> float:
    """Mixing boundary area using the family's averaged metric and density."""
    gbar = averaged_metric_field(family, quadrature_nodes)
    return mixing_area(region, gbar, family.density, boundary_nodes,
                       weight=weight)

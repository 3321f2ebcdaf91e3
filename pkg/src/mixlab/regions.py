"""Compact planar regions with smooth (or piecewise smooth) boundaries.

A region carries a vectorized indicator, a positively oriented closed
boundary curve parametrized on [0, 1), its tangent, and a bounding box.
Polygons record their corner parameters so quadrature panels can be aligned
with the smooth pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .errors import GeometryError

__all__ = [
    "Region",
    "disk",
    "ellipse",
    "rectangle_region",
    "square",
    "polygon_region",
    "validate_region",
    "region_area",
]


@dataclass
class Region:
    indicator: Callable[[np.ndarray], np.ndarray]
    curve: Callable[[np.ndarray], np.ndarray]
    tangent: Callable[[np.ndarray], np.ndarray]
    bounding_box: Tuple[float, float, float, float]  # (xmin, xmax, ymin, ymax)
    name: str = "region"
    corners: Tuple[float, ...] = field(default=())  # parameter values of kinks

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.indicator(np.asarray(pts, dtype=float)))

    @property
    def diameter(self) -> float:
        x0, x1, y0, y1 = self.bounding_box
        return float(np.hypot(x1 - x0, y1 - y0))


def disk(radius: float, center=(0.0, 0.0)) -> Region:
    if radius <= 0:
        raise GeometryError("disk radius must be positive")
    cx, cy = float(center[0]), float(center[1])

    def indicator(pts):
        return np.hypot(pts[..., 0] - cx, pts[..., 1] - cy) <= radius

    def curve(s):
        ang = 2.0 * np.pi * np.asarray(s, dtype=float)
        return np.stack([cx + radius * np.cos(ang),
                         cy + radius * np.sin(ang)], axis=-1)

    def tangent(s):
        ang = 2.0 * np.pi * np.asarray(s, dtype=float)
        return 2.0 * np.pi * radius * np.stack(
            [-np.sin(ang), np.cos(ang)], axis=-1)

    return Region(indicator, curve, tangent,
                  (cx - radius, cx + radius, cy - radius, cy + radius),
                  name=f"disk r={radius:g}")


def ellipse(semi_x: float, semi_y: float, center=(0.0, 0.0),
            angle: float = 0.0) -> Region:
    if semi_x <= 0 or semi_y <= 0:
        raise GeometryError("ellipse semiaxes must be positive")
    cx, cy = float(center[0]), float(center[1])
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])

    def indicator(pts):
        dx = pts[..., 0] - cx
        dy = pts[..., 1] - cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (u / semi_x) ** 2 + (v / semi_y) ** 2 <= 1.0

    def curve(t):
        ang = 2.0 * np.pi * np.asarray(t, dtype=float)
        local = np.stack([semi_x * np.cos(ang), semi_y * np.sin(ang)], axis=-1)
        return local @ rot.T + np.array([cx, cy])

    def tangent(t):
        ang = 2.0 * np.pi * np.asarray(t, dtype=float)
        local = 2.0 * np.pi * np.stack(
            [-semi_x * np.sin(ang), semi_y * np.cos(ang)], axis=-1)
        return local @ rot.T

    reach = max(semi_x, semi_y)
    return Region(indicator, curve, tangent,
                  (cx - reach, cx + reach, cy - reach, cy + reach),
                  name=f"ellipse {semi_x:g}x{semi_y:g}")


def polygon_region(vertices, name: str = "polygon") -> Region:
    """Simple polygon from a CCW vertex list; boundary is piecewise linear."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
        raise GeometryError("polygon needs at least 3 (x, y) vertices")
    signed_area = 0.5 * np.sum(
        verts[:, 0] * np.roll(verts[:, 1], -1)
        - np.roll(verts[:, 0], -1) * verts[:, 1])
    if signed_area <= 0:
        raise GeometryError("polygon vertices must be counter-clockwise")

    edges = np.roll(verts, -1, axis=0) - verts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths == 0):
        raise GeometryError("polygon has a zero-length edge")
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    breaks = cum / total  # corner parameters in [0, 1]

    def indicator(pts):
        x = pts[..., 0]
        y = pts[..., 1]
        inside = np.zeros(np.shape(x), dtype=bool)
        n = len(verts)
        for k in range(n):
            x1, y1 = verts[k]
            x2, y2 = verts[(k + 1) % n]
            crosses = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (x < xint)
        return inside

    def _locate(s):
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        idx = np.clip(np.searchsorted(breaks, s, side="right") - 1,
                      0, len(verts) - 1)
        frac = (s - breaks[idx]) / (breaks[idx + 1] - breaks[idx])
        return idx, frac

    def curve(s):
        idx, frac = _locate(s)
        return verts[idx] + frac[..., None] * edges[idx]

    def tangent(s):
        # arc-length parametrization: d curve / d s = edge * (total / length)
        idx, _ = _locate(s)
        return edges[idx] * (total / lengths[idx])[..., None]

    x0, y0 = verts.min(axis=0)
    x1, y1 = verts.max(axis=0)
    return Region(indicator, curve, tangent, (x0, x1, y0, y1), name=name,
                  corners=tuple(breaks[:-1]))


def rectangle_region(x0: float, x1: float, y0: float, y1: float) -> Region:
    if not (x1 > x0 and y1 > y0):
        raise GeometryError("rectangle bounds must be ordered")
    reg = polygon_region([(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
                         name=f"rect [{x0:g},{x1:g}]x[{y0:g},{y1:g}]")
    return reg


def square(side: float = 1.0, corner=(0.0, 0.0)) -> Region:
    x0, y0 = float(corner[0]), float(corner[1])
    return rectangle_region(x0, x0 + side, y0, y0 + side)


def region_area(region: Region, boundary_nodes: int = 512) -> float:
    """Area enclosed by the boundary via the divergence theorem.

    Exact to quadrature accuracy for the Lebesgue measure (density 1).
    """
    from .mixing_area import _panelize, _GL_NODES, _GL_WEIGHTS

    total = 0.0
    for s0, s1 in _panelize(region, boundary_nodes):
        mid = 0.5 * (s0 + s1)
        half = 0.5 * (s1 - s0)
        s = mid + half * _GL_NODES
        p = region.curve(s)
        dp = region.tangent(s)
        cross = p[..., 0] * dp[..., 1] - p[..., 1] * dp[..., 0]
        total += half * float(np.dot(_GL_WEIGHTS, cross))
    return 0.5 * total


def validate_region(region: Region, n_samples: int = 64,
                    offset_frac: float = 1e-3) -> None:
    """Sanity-check indicator/boundary consistency by probing offset points."""
    s = (np.arange(n_samples) + 0.37) / n_samples
    p = region.curve(s)
    tang = region.tangent(s)
    speed = np.hypot(tang[..., 0], tang[..., 1])
    if np.any(speed < 1e-12):
        raise GeometryError("boundary tangent vanishes")
    normal = np.stack([tang[..., 1], -tang[..., 0]], axis=-1) / speed[..., None]
    delta = offset_frac * max(1.0, region.diameter)
    inside = region.contains(p - delta * normal)
    outside = region.contains(p + delta * normal)
    if not bool(np.all(inside)):
        raise GeometryError("indicator is False just inside the boundary")
    if bool(np.any(outside)):
        raise GeometryError("indicator is True just outside the boundary")
    gap = np.linalg.norm(np.asarray(region.curve(0.0))
                         - np.asarray(region.curve(1.0)))
    if gap > 1e-9 * max(1.0, region.diameter):
        raise GeometryError("boundary curve is not closed")

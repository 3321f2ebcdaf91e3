"""First- and second-order coefficients of the diffusion in coordinates.

Writing the weighted operator as div_rho(G grad u) with G the inverse metric,
the equivalent non-divergence form has second-order coefficient a = 2 G and
first-order coefficient b_j = (1/rho) sum_i d_i(rho G_ij).  The noise factor
sigma is the unique symmetric SPD square root of a, so sigma sigma^T = a
holds pointwise to rounding.

Spatial derivatives in b use central finite differences; user-supplied
families generally have no analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GeometryError
from .families import MetricFamily, averaged_inverse_metric, unit_quadrature
from .spd import sym_sqrt2x2, validate_spd

__all__ = [
    "CoefficientField",
    "coefficients",
    "averaged_coefficients",
    "constant_coefficients",
]


@dataclass
class CoefficientField:
    """Vectorized evaluators for the coefficients (a, b, sigma) and rho."""

    a: Callable[[float, np.ndarray], np.ndarray]
    b: Callable[[float, np.ndarray], np.ndarray]
    rho: Callable[[np.ndarray], np.ndarray]
    time_dependent: bool
    euclidean_outside_radius: float
    h_fd: float
    family: MetricFamily | None = field(default=None, repr=False)

    def sigmama(self, *_):  # pragma: no cover - guard against typos
        raise AttributeError

    def sigma(self, t: float, pts: np.ndarray) -> np.ndarray:
        """Symmetric SPD square root of a(t, pts)."""
        m = self.a(t, pts)
        validate_spd(m, "second-order coefficient a")
        return sym_sqrt2x2(m)

    def a_marcher(self, pts: np.ndarray):
        """Evaluator of a bound to a fixed point set, stepped through time."""
        if self.family is not None:
            marcher = self.family.make_marcher(pts)
            return _FamilyAMarcher(marcher)
        return _DirectAMarcher(self, np.asarray(pts, dtype=float))


class _FamilyAMarcher:
    def __init__(self, inverse_metric_marcher):
        self._m = inverse_metric_marcher

    def a(self, t: float) -> np.ndarray:
        return 2.0 * self._m.inverse_metric(t)


class _DirectAMarcher:
    def __init__(self, coeffs, pts):
        self._coeffs = coeffs
        self._pts = pts

    def a(self, t: float) -> np.ndarray:
        return self._coeffs.a(t, self._pts)


def _checked_density(family: MetricFamily):
    def rho(pts):
        val = np.asarray(family.density(pts), dtype=float)
        if np.any(val <= 0) or not np.all(np.isfinite(val)):
            raise GeometryError("density must be positive and finite")
        return val
    return rho


def _drift_from_divergence(family: MetricFamily, h_fd: float):
    """b_j = (1/rho) sum_i d_i(rho G_ij) by central differences."""
    rho = _checked_density(family)

    def b(t, pts):
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1] + (2,))
        for i in range(2):
            dp = np.zeros(2)
            dp[i] = h_fd
            plus = pts + dp
            minus = pts - dp
            wp = rho(plus)[..., None] * family.inverse_metric(t, plus)[..., i, :]
            wm = rho(minus)[..., None] * family.inverse_metric(t, minus)[..., i, :]
            out += (wp - wm) / (2.0 * h_fd)
        out /= rho(pts)[..., None]
        # exactly Euclidean outside the cutoff ball: kill FD rounding noise
        radius = family.euclidean_outside_radius
        if radius > 0 and np.isfinite(radius):
            outside = np.hypot(pts[..., 0], pts[..., 1]) >= radius
            out[outside] = 0.0
        return out

    return b


def _default_fd_step(family: MetricFamily) -> float:
    radius = family.euclidean_outside_radius
    scale = radius if (np.isfinite(radius) and radius > 0) else 1.0
    return 1e-5 * max(1.0, scale)


def coefficients(family: MetricFamily, h_fd: float | None = None,
                 force_fd_drift: bool = False) -> CoefficientField:
    """Coefficient field of the time-dependent operator for a metric family.

    The drift uses the family's closed-form derivative when it provides one
    (unless ``force_fd_drift``); otherwise central finite differences with
    step ``h_fd``.
    """
    if h_fd is None:
        h_fd = _default_fd_step(family)

    def a(t, pts):
        m = 2.0 * family.inverse_metric(t, pts)
        validate_spd(m, "second-order coefficient a")
        return m

    fd_drift = _drift_from_divergence(family, h_fd)
    has_analytic = (not force_fd_drift
                    and family.analytic_drift(0.0, np.zeros((1, 2)))
                    is not None)

    def b(t, pts):
        if has_analytic:
            return np.asarray(family.analytic_drift(t, pts), dtype=float)
        return fd_drift(t, pts)

    return CoefficientField(
        a=a,
        b=b,
        rho=_checked_density(family),
        time_dependent=family.time_dependent,
        euclidean_outside_radius=family.euclidean_outside_radius,
        h_fd=h_fd,
        family=family,
    )


def averaged_coefficients(family: MetricFamily, h_fd: float | None = None,
                          quadrature_nodes: int = 16) -> CoefficientField:
    """Time-averaged coefficients: abar = int a dt, bbar = int b dt.

    By linearity abar = 2 (time average of the inverse metric), so the
    identity abar = 2 gbar^{-1} holds to quadrature accuracy by construction.
    The returned field is time-independent (the time argument is ignored).
    """
    if h_fd is None:
        h_fd = _default_fd_step(family)
    ts, ws = unit_quadrature(quadrature_nodes)
    b_t = _drift_from_divergence(family, h_fd)

    def a(_t, pts):
        m = 2.0 * averaged_inverse_metric(family, pts, quadrature_nodes)
        validate_spd(m, "averaged coefficient abar")
        return m

    def b(_t, pts):
        pts = np.asarray(pts, dtype=float)
        acc = np.zeros(pts.shape[:-1] + (2,))
        for t, w in zip(ts, ws):
            acc += w * b_t(t, pts)
        return acc

    return CoefficientField(
        a=a,
        b=b,
        rho=_checked_density(family),
        time_dependent=False,
        euclidean_outside_radius=family.euclidean_outside_radius,
        h_fd=h_fd,
        family=None,
    )


def constant_coefficients(a_of_t: Callable[[float], np.ndarray],
                          time_dependent: bool = True) -> CoefficientField:
    """Spatially constant coefficients from a matrix-valued function of time.

    Used for solver identities (commuting-operator checks); such fields are
    not Euclidean outside any ball, so they do not define a valid family.
    """

    def a(t, pts):
        pts = np.asarray(pts, dtype=float)
        m = np.asarray(a_of_t(t), dtype=float)
        validate_spd(m, "constant coefficient a(t)")
        return np.broadcast_to(m, pts.shape[:-1] + (2, 2)).copy()

    def b(t, pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1] + (2,))

    def rho(pts):
        pts = np.asarray(pts, dtype=float)
        return np.ones(pts.shape[:-1])

    return CoefficientField(a=a, b=b, rho=rho, time_dependent=time_dependent,
                            euclidean_outside_radius=np.inf, h_fd=0.0,
                            family=None)

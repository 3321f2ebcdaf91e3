"""Time-dependent metric families and the time-averaged metric.

A family assigns to every time ``t in [0, 1]`` and point ``x`` a symmetric
positive-definite 2x2 matrix ``g_t(x)`` together with a positive mass density
``rho(x)``.  All built-in families are exactly Euclidean (g = I, rho = 1)
outside a finite radius, which is what lets a large rectangle stand in for
the whole plane in the solvers.

Evaluators are vectorized: ``pts`` has shape ``(..., 2)`` and matrix results
have shape ``(..., 2, 2)``.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import GeometryError
from .spd import SPD2, inv2x2, validate_spd

__all__ = [
    "MetricFamily",
    "EuclideanFamily",
    "DiagTimeFamily",
    "ShearFamily",
    "RotatingGyreFamily",
    "PullbackFamily",
    "pullback_family",
    "bump_gyre_flow",
    "averaged_metric",
    "averaged_inverse_metric",
    "make_family",
    "unit_quadrature",
]

_EYE2 = np.eye(2)


def unit_quadrature(nodes: int):
    """Gauss-Legendre nodes and weights transplanted to [0, 1]."""
    if nodes < 2:
        raise GeometryError("quadrature needs at least 2 nodes")
    x, w = leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def smoothstep_cutoff(r, r_plateau: float, r_outer: float):
    """C^2 radial cutoff: 1 for r <= r_plateau, 0 for r >= r_outer."""
    u = np.clip((np.asarray(r, dtype=float) - r_plateau)
                / (r_outer - r_plateau), 0.0, 1.0)
    return 1.0 - u ** 3 * (10.0 + u * (-15.0 + 6.0 * u))


def mollifier_bump(r, radius: float):
    """C-infinity bump: exp(1 - 1/(1 - (r/radius)^2)) inside, 0 outside."""
    r = np.asarray(r, dtype=float)
    q = (r / radius) ** 2
    out = np.zeros_like(q)
    inside = q < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
    return out


class MetricFamily:
    """Base class: a smooth field of SPD matrices plus a mass density."""

    name = "family"
    #: radius of the ball outside which g = I and rho = 1 for all t
    euclidean_outside_radius = 0.0
    time_dependent = True
    #: True when the mass density is identically 1 (enables exact
    #: boundary-quadrature normalizations)
    has_unit_density = True

    # -- evaluators ------------------------------------------------------
    def inverse_metric(self, t: float, pts: np.ndarray) -> np.ndarray:
        return inv2x2(self.metric(t, pts))

    def metric(self, t: float, pts: np.ndarray) -> np.ndarray:
        return inv2x2(self.inverse_metric(t, pts))

    def density(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.ones(pts.shape[:-1])

    def analytic_drift(self, t: float, pts: np.ndarray):
        """Exact (1/rho) d_i(rho G_ij), or None to fall back to differences.

        Families with simple closed-form spatial derivatives override this;
        the finite-difference route stays the default and is cross-checked
        against the analytic one in tests.
        """
        return None

    # -- point API -------------------------------------------------------
    def metric_at(self, t: float, x) -> SPD2:
        m = self.metric(t, np.asarray(x, dtype=float))
        return SPD2.from_matrix(m)

    def inverse_metric_at(self, t: float, x) -> SPD2:
        return SPD2.from_matrix(self.inverse_metric(t, np.asarray(x, float)))

    # -- solver hooks ----------------------------------------------------
    def make_marcher(self, pts: np.ndarray):
        """Evaluator bound to a fixed point set, stepped through time.

        The generic version just re-evaluates; families whose evaluation
        integrates an ODE override this with an incremental integrator.
        """
        return _DirectMarcher(self, np.asarray(pts, dtype=float))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class _DirectMarcher:
    def __init__(self, family, pts):
        self.family = family
        self.pts = pts

    def inverse_metric(self, t: float) -> np.ndarray:
        return self.family.inverse_metric(t, self.pts)


class EuclideanFamily(MetricFamily):
    """g_t = I, rho = 1: the flat reference geometry."""

    name = "euclidean"
    euclidean_outside_radius = 0.0
    time_dependent = False

    def metric(self, t, pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(_EYE2, pts.shape[:-1] + (2, 2)).copy()

    inverse_metric = metric

    def analytic_drift(self, t, pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1] + (2,))


class _CutoffFamily(MetricFamily):
    """Interpolates a spatially-constant core metric to I between two radii."""

    def __init__(self, plateau_radius: float, outer_radius: float):
        if not 0 < plateau_radius < outer_radius:
            raise GeometryError("need 0 < plateau_radius < outer_radius")
        self.plateau_radius = plateau_radius
        self.euclidean_outside_radius = outer_radius

    def core_metric(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def _cutoff(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[..., 0], pts[..., 1])
        return smoothstep_cutoff(r, self.plateau_radius,
                                 self.euclidean_outside_radius)

    def metric(self, t, pts):
        chi = self._cutoff(pts)
        core = self.core_metric(t)
        return _EYE2 + chi[..., None, None] * (core - _EYE2)

    def make_marcher(self, pts):
        # the spatial interpolation factor is time-independent: cache it
        return _CutoffMarcher(self, self._cutoff(pts))


class _CutoffMarcher:
    def __init__(self, family: "_CutoffFamily", chi):
        self.family = family
        self.chi = chi[..., None, None]

    def inverse_metric(self, t: float) -> np.ndarray:
        core = self.family.core_metric(t)
        return inv2x2(_EYE2 + self.chi * (core - _EYE2))


class DiagTimeFamily(_CutoffFamily):
    """Core metric diag(1/(1+t), 1): axis-aligned, shrinking in time."""

    name = "diag_time"
    time_dependent = True

    def core_metric(self, t):
        return np.array([[1.0 / (1.0 + t), 0.0], [0.0, 1.0]])


class ShearFamily(_CutoffFamily):
    """Metric dragged along by the steady linear shear (x, y) -> (x + t y, y).

    Inside the plateau the metric equals [[1, t], [t, 1 + t^2]], the exact
    pullback of the Euclidean metric by the shear map; it is interpolated to
    the identity between the plateau and outer radii.
    """

    name = "shear_pullback"
    time_dependent = True

    def __init__(self, plateau_radius: float = 2.0, outer_radius: float = 3.0):
        super().__init__(plateau_radius, outer_radius)

    def core_metric(self, t):
        return np.array([[1.0, t], [t, 1.0 + t * t]])


class RotatingGyreFamily(MetricFamily):
    """A gyre-like patch whose anisotropy axis sweeps an eighth of a turn.

    The inverse metric is I + m(t, r) * [[cos a, sin a], [sin a, -cos a]]
    with a = pi t / 2, modulation m = (amplitude/2) sin^2(pi t) s(r), and s a
    smooth bump supported on r < radius: the enhanced-diffusion axis rotates
    while its strength ramps up and back down, and the family is exactly
    Euclidean at t = 0, t = 1 and outside the bump.  The time average has
    the closed form

        I + s(r) * (8 amplitude / (15 pi)) * [[1, 1], [1, -1]],

    anisotropic along a tilted axis.  SPD for amplitude < 2; the diagonal
    dominance used by the monotone solver stencil holds for
    amplitude <= sqrt(2).
    """

    name = "rotating_gyre"
    time_dependent = True

    def __init__(self, amplitude: float = 1.3, radius: float = 2.5):
        if not 0 < amplitude < 2:
            raise GeometryError("amplitude must lie in (0, 2) to stay SPD")
        self.amplitude = amplitude
        self.euclidean_outside_radius = radius

    def _bump(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[..., 0], pts[..., 1])
        return mollifier_bump(r, self.euclidean_outside_radius)

    def _bump_gradient(self, pts):
        """Gradient of the mollifier bump: -2 s(r) x / (R^2 (1 - q)^2)."""
        pts = np.asarray(pts, dtype=float)
        radius = self.euclidean_outside_radius
        q = (pts[..., 0] ** 2 + pts[..., 1] ** 2) / radius ** 2
        s = self._bump(pts)
        factor = np.zeros_like(q)
        inside = q < 1.0
        factor[inside] = -2.0 * s[inside] / (radius ** 2
                                             * (1.0 - q[inside]) ** 2)
        return factor[..., None] * pts

    def _assemble(self, t: float, s: np.ndarray) -> np.ndarray:
        m = 0.5 * self.amplitude * np.sin(np.pi * t) ** 2 * s
        c, sn = np.cos(0.5 * np.pi * t), np.sin(0.5 * np.pi * t)
        out = np.zeros(s.shape + (2, 2))
        out[..., 0, 0] = 1.0 + m * c
        out[..., 1, 1] = 1.0 - m * c
        out[..., 0, 1] = m * sn
        out[..., 1, 0] = m * sn
        return out

    def inverse_metric(self, t, pts):
        return self._assemble(t, self._bump(pts))

    def analytic_drift(self, t, pts):
        # G = I + w(t) s(x) M(t) with constant M(t): b = w(t) M grad s
        grad = self._bump_gradient(pts)
        w = 0.5 * self.amplitude * np.sin(np.pi * t) ** 2
        c, sn = np.cos(0.5 * np.pi * t), np.sin(0.5 * np.pi * t)
        out = np.empty_like(grad)
        out[..., 0] = w * (c * grad[..., 0] + sn * grad[..., 1])
        out[..., 1] = w * (sn * grad[..., 0] - c * grad[..., 1])
        return out

    def averaged_inverse_metric_exact(self, pts):
        """Closed-form time average of the inverse metric (for cross-checks)."""
        s = self._bump(pts)
        q = 8.0 * self.amplitude / (15.0 * np.pi) * s
        out = np.zeros(s.shape + (2, 2))
        out[..., 0, 0] = 1.0 + q
        out[..., 1, 1] = 1.0 - q
        out[..., 0, 1] = q
        out[..., 1, 0] = q
        return out

    def make_marcher(self, pts):
        # the spatial bump is time-independent: cache it
        bump = self._bump(pts)
        family = self

        class _GyreMarcher:
            def inverse_metric(self, t: float) -> np.ndarray:
                return family._assemble(t, bump)

        return _GyreMarcher()


class PullbackFamily(MetricFamily):
    """Metric family g_t = (D Phi_0^t)^T D Phi_0^t induced by a velocity field.

    The flow map Jacobian is obtained by integrating the variational equation
    jointly with the flow ODE using fixed-step classical Runge-Kutta.  The
    velocity field should be divergence-free and supported inside
    ``euclidean_outside_radius`` for the family to satisfy the
    Euclidean-outside requirement; this is not enforced, only spot-checked by
    the caller's tests.
    """

    name = "pullback"
    time_dependent = True

    def __init__(self, velocity, euclidean_outside_radius: float,
                 density=None, velocity_jacobian=None,
                 steps_per_unit: int = 256, jac_fd_step: float = 1e-6):
        self.velocity = velocity
        self.velocity_jacobian = velocity_jacobian
        self.euclidean_outside_radius = euclidean_outside_radius
        self._density = density
        self.has_unit_density = density is None
        self.steps_per_unit = steps_per_unit
        self.jac_fd_step = jac_fd_step

    def density(self, pts):
        if self._density is None:
            return super().density(pts)
        rho = np.asarray(self._density(np.asarray(pts, dtype=float)),
                         dtype=float)
        if np.any(rho <= 0):
            raise GeometryError("density must be positive")
        return rho

    def _vel_jac(self, t, pts):
        if self.velocity_jacobian is not None:
            return self.velocity_jacobian(t, pts)
        h = self.jac_fd_step
        out = np.empty(pts.shape[:-1] + (2, 2))
        for j in range(2):
            dp = np.zeros(2)
            dp[j] = h
            vp = self.velocity(t, pts + dp)
            vm = self.velocity(t, pts - dp)
            out[..., :, j] = (np.asarray(vp) - np.asarray(vm)) / (2.0 * h)
        return out

    def _rk4_step(self, t, dt, phi, jac):
        def rhs(s, p, j):
            return (np.asarray(self.velocity(s, p), dtype=float),
                    self._vel_jac(s, p) @ j)

        k1p, k1j = rhs(t, phi, jac)
        k2p, k2j = rhs(t + 0.5 * dt, phi + 0.5 * dt * k1p, jac + 0.5 * dt * k1j)
        k3p, k3j = rhs(t + 0.5 * dt, phi + 0.5 * dt * k2p, jac + 0.5 * dt * k2j)
        k4p, k4j = rhs(t + dt, phi + dt * k3p, jac + dt * k3j)
        phi = phi + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        jac = jac + dt / 6.0 * (k1j + 2 * k2j + 2 * k3j + k4j)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(jac))):
            raise GeometryError("flow integration produced non-finite values")
        return phi, jac

    def flow_and_jacobian(self, t: float, pts: np.ndarray,
                          start: float = 0.0, state=None):
        """Integrate the flow and its Jacobian from ``start`` to ``t``."""
        pts = np.asarray(pts, dtype=float)
        if state is None:
            phi = pts.copy()
            jac = np.broadcast_to(_EYE2, pts.shape[:-1] + (2, 2)).copy()
        else:
            phi, jac = state
        span = t - start
        n = max(1, int(np.ceil(abs(span) * self.steps_per_unit)))
        if span == 0.0:
            return phi, jac
        dt = span / n
        s = start
        for _ in range(n):
            phi, jac = self._rk4_step(s, dt, phi, jac)
            s += dt
        return phi, jac

    def metric(self, t, pts):
        _, jac = self.flow_and_jacobian(t, pts)
        return np.swapaxes(jac, -1, -2) @ jac

    def make_marcher(self, pts):
        return _FlowMarcher(self, np.asarray(pts, dtype=float))


class _FlowMarcher:
    """Incremental flow-map evaluator for a fixed point set.

    Consecutive queries at nearby times advance the cached flow state
    (forward or backward); the first query integrates from t = 0.
    """

    def __init__(self, family: PullbackFamily, pts):
        self.family = family
        self.pts = pts
        self.t = 0.0
        self.state = family.flow_and_jacobian(0.0, pts)

    def inverse_metric(self, t: float) -> np.ndarray:
        if t != self.t:
            self.state = self.family.flow_and_jacobian(
                t, self.pts, start=self.t, state=self.state)
            self.t = t
        jac = self.state[1]
        return inv2x2(np.swapaxes(jac, -1, -2) @ jac)


def pullback_family(velocity, euclidean_outside_radius: float, density=None,
                    **kwargs) -> PullbackFamily:
    """Build the metric family induced by a volume-preserving velocity field."""
    return PullbackFamily(velocity, euclidean_outside_radius,
                          density=density, **kwargs)


def bump_gyre_flow(strength: float = 1.0, radius: float = 2.5,
                   steps_per_unit: int = 256) -> PullbackFamily:
    """Pullback family of a compactly supported rotating-cell flow.

    The velocity is the perpendicular gradient of the stream bump
    psi = strength * (1 - (r/radius)^2)^4 (zero outside), modulated by
    sin(pi t): divergence-free, C^3, and supported in r < radius, so the
    induced metric family is exactly Euclidean outside that ball.
    """

    def velocity(t, pts):
        pts = np.asarray(pts, dtype=float)
        r2 = (pts[..., 0] ** 2 + pts[..., 1] ** 2) / radius ** 2
        inside = np.maximum(1.0 - r2, 0.0)
        dpsi_dr2 = -4.0 * strength * inside ** 3 / radius ** 2
        grad = 2.0 * dpsi_dr2[..., None] * pts
        out = np.empty_like(pts)
        out[..., 0] = -grad[..., 1]
        out[..., 1] = grad[..., 0]
        return np.sin(np.pi * t) * out

    fam = PullbackFamily(velocity, radius, steps_per_unit=steps_per_unit)
    fam.name = "bump_gyre_flow"
    return fam


def averaged_inverse_metric(family: MetricFamily, pts: np.ndarray,
                            quadrature_nodes: int = 16) -> np.ndarray:
    """Time average of the inverse metric over [0, 1], vectorized over pts."""
    ts, ws = unit_quadrature(quadrature_nodes)
    pts = np.asarray(pts, dtype=float)
    acc = np.zeros(pts.shape[:-1] + (2, 2))
    for t, w in zip(ts, ws):
        gi = family.inverse_metric(t, pts)
        validate_spd(gi, f"inverse metric at t={t:.6f}")
        acc += w * gi
    return acc


def averaged_metric(family: MetricFamily, x, quadrature_nodes: int = 16) -> SPD2:
    """The averaged metric (integral of g_t^{-1} dt)^{-1} at a point."""
    acc = averaged_inverse_metric(family, np.asarray(x, dtype=float),
                                  quadrature_nodes)
    validate_spd(acc, "time-averaged inverse metric")
    return SPD2.from_matrix(inv2x2(acc))


def averaged_metric_field(family: MetricFamily, quadrature_nodes: int = 16):
    """Vectorized evaluator pts -> averaged metric matrices."""
    def gbar(pts):
        acc = averaged_inverse_metric(family, pts, quadrature_nodes)
        return inv2x2(acc)
    return gbar


_FAMILY_BUILDERS = {
    "euclidean": lambda **kw: EuclideanFamily(),
    "diag_time": lambda plateau_radius=2.0, outer_radius=3.0, **kw:
        DiagTimeFamily(plateau_radius, outer_radius),
    "shear_pullback": lambda plateau_radius=2.0, outer_radius=3.0, **kw:
        ShearFamily(plateau_radius, outer_radius),
    "rotating_gyre": lambda amplitude=1.3, radius=2.5, **kw:
        RotatingGyreFamily(amplitude, radius),
    "bump_gyre_flow": lambda strength=1.0, radius=2.5, steps_per_unit=256,
        **kw: bump_gyre_flow(strength, radius, steps_per_unit),
}


def make_family(name: str, **params) -> MetricFamily:
    """Construct a named family ("euclidean", "diag_time", ...)."""
    try:
        builder = _FAMILY_BUILDERS[name]
    except KeyError:
        raise GeometryError(
            f"unknown family {name!r}; known: {sorted(_FAMILY_BUILDERS)}")
    return builder(**params)

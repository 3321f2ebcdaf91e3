"""Euler-Maruyama engine with reproducible, coupled path ensembles.

The process integrated on [0, 1] is

    X_{k+1} = X_k + eps * b(tau_k, X_k) dt + sqrt(eps) sigma(tau_k, X_k) sqrt(dt) xi_k

with tau_k = 1 - k dt when time-reversed (tau_k = k dt otherwise) and
standard-normal pairs xi_k drawn from counter-based streams.  Ensembles built
from the same master seed with the same path/step counts consume identical
Brownian increments path-by-path, which is what coupled strong-error
estimates require.  Frozen specs evaluate sigma at the initial position and
carry no drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng
from .coefficients import averaged_coefficients, coefficients
from .errors import SimulationError
from .families import MetricFamily
from .regions import Region, region_area

__all__ = [
    "SdeSpec",
    "PathEnsemble",
    "InitialLaw",
    "euler_maruyama",
    "sde_spec_for_family",
    "point_mass_law",
    "indicator_law",
    "weighted_indicator_law",
    "derive_seeds",
    "region_mass",
]


def derive_seeds(master_seed: int, n: int) -> list[int]:
    """Independent child seeds for sub-experiments of one master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


@dataclass
class SdeSpec:
    """Drift/diffusion data for one simulated process.

    ``drift`` is the b of the eps * b dt term (may be None); ``sigma`` maps
    (t, pts) to 2x2 matrices.  With ``freeze_at_start`` the diffusion matrix
    is evaluated at the initial position for every step and the drift is
    dropped, matching the Gaussian surrogate process.
    """

    drift: Callable[[float, np.ndarray], np.ndarray] | None
    sigma: Callable[[float, np.ndarray], np.ndarray]
    eps: float
    freeze_at_start: bool = False
    time_reversed: bool = False

    def __post_init__(self):
        if self.eps < 0:
            raise SimulationError("diffusivity must be non-negative")
        if self.freeze_at_start:
            self.drift = None


@dataclass
class PathEnsemble:
    """Endpoints (and optional checkpoint states) of N simulated paths."""

    endpoints: np.ndarray                 # (N, 2)
    initial: np.ndarray                   # (N, 2)
    master_seed: int
    n_steps: int
    shared_noise_tag: tuple
    checkpoint_times: np.ndarray | None = None
    checkpoints: np.ndarray | None = None   # (n_checkpoints, N, 2)
    law_mass: float = 1.0
    law_description: str = "unspecified"

    @property
    def n_paths(self) -> int:
        return self.endpoints.shape[0]

    @staticmethod
    def stream_index(path: int) -> tuple[int, int]:
        """(chunk, lane) locating the path's noise stream."""
        return path // rng.CHUNK, path % rng.CHUNK


@dataclass
class InitialLaw:
    """Sampler for the initial distribution, with its normalizing mass."""

    sample: Callable[[int, int], np.ndarray]   # (master_seed, n) -> (n, 2)
    description: str
    mass: float


def point_mass_law(x) -> InitialLaw:
    x = np.asarray(x, dtype=float).reshape(2)

    def sample(master_seed: int, n: int) -> np.ndarray:
        return np.tile(x, (n, 1))

    return InitialLaw(sample, f"point mass at {tuple(x)}", 1.0)


def region_mass(region: Region, density=None, resolution: int = 1024,
                subsample: int = 4) -> float:
    """Weighted mass of a region: boundary quadrature when the density is 1,
    otherwise an anti-aliased midpoint rule over the bounding box."""
    if density is None:
        return region_area(region)
    x0, x1, y0, y1 = region.bounding_box
    n = resolution * subsample
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    total = 0.0
    cell = (x1 - x0) * (y1 - y0) / n / n
    block = max(1, (1 << 22) // n)
    for start in range(0, n, block):
        gx, gy = np.meshgrid(xs[start:start + block], ys, indexing="ij")
        pts = np.stack([gx, gy], axis=-1)
        inside = region.contains(pts)
        w = np.asarray(density(pts), dtype=float)
        total += float(np.sum(w * inside)) * cell
    return total


def rejection_law(bounding_box, accept_density, bound: float,
                  mass: float, description: str) -> InitialLaw:
    """Law with unnormalized density ``accept_density`` on a bounding box.

    Proposals are uniform on the box and accepted with probability
    density / bound; ``bound`` must dominate the density or the samples are
    biased.  ``mass`` is the density's total integral, used to rescale
    escape fractions into inner products.
    """
    x0, x1, y0, y1 = bounding_box
    lo = np.array([x0, y0])
    hi = np.array([x1, y1])

    def sample(master_seed: int, n: int) -> np.ndarray:
        out = np.empty((n, 2))
        for chunk_index, start, stop in rng.chunk_ranges(n):
            need = stop - start
            filled = 0
            round_no = 0
            while filled < need:
                gen = rng.generator(master_seed, rng.PURPOSE_INITIAL,
                                    chunk_index, round_no)
                batch = max(4096, 2 * (need - filled))
                cand = gen.uniform(lo, hi, size=(batch, 2))
                u = gen.uniform(size=batch)
                accept = u * bound <= accept_density(cand)
                good = cand[accept]
                take = min(need - filled, good.shape[0])
                out[start + filled:start + filled + take] = good[:take]
                filled += take
                round_no += 1
                if round_no > 10000:
                    raise SimulationError(
                        "rejection sampler acceptance rate is vanishing")
        return out

    return InitialLaw(sample, description, mass)


def indicator_law(region: Region, family: MetricFamily | None = None) -> InitialLaw:
    """Initial law proportional to the region's indicator times the density."""
    if family is None or family.has_unit_density:
        def accept(pts):
            return region.contains(pts).astype(float)
        return rejection_law(region.bounding_box, accept, 1.0,
                             region_area(region),
                             f"indicator law on {region.name}")

    rho = family.density

    def accept(pts):
        return region.contains(pts) * np.asarray(rho(pts), dtype=float)

    bound = _probe_bound(region.bounding_box, rho)
    mass = region_mass(region, rho)
    return rejection_law(region.bounding_box, accept, bound, mass,
                         f"density-weighted indicator law on {region.name}")


def _probe_bound(bounding_box, density, margin: float = 1.05) -> float:
    """Estimated sup of a density over a box (coarse grid plus headroom)."""
    x0, x1, y0, y1 = bounding_box
    probe = np.stack(np.meshgrid(np.linspace(x0, x1, 256),
                                 np.linspace(y0, y1, 256),
                                 indexing="ij"), axis=-1)
    return float(np.max(density(probe))) * margin


def weighted_indicator_law(region: Region, weight,
                           family: MetricFamily | None = None,
                           bound: float | None = None) -> InitialLaw:
    """Initial law proportional to weight * indicator * density."""
    unit = family is None or family.has_unit_density
    rho = (lambda pts: np.ones(np.asarray(pts).shape[:-1])) \
        if unit else family.density

    def unnorm(pts):
        return (region.contains(pts) * np.asarray(weight(pts), dtype=float)
                * np.asarray(rho(pts), dtype=float))

    dens_bound = _probe_bound(region.bounding_box, unnorm)
    if dens_bound < 0:
        raise SimulationError("weight must be non-negative on the region")
    if bound is None:
        bound = dens_bound
    mass = region_mass(region, lambda pts: np.asarray(weight(pts), float)
                       * np.asarray(rho(pts), float))
    return rejection_law(region.bounding_box, unnorm, bound, mass,
                         f"weighted indicator law on {region.name}")


def default_noise_tag(master_seed: int, n_paths: int, n_steps: int) -> tuple:
    return ("philox-v1", master_seed, n_paths, n_steps)


def euler_maruyama(spec: SdeSpec, law: InitialLaw, n_paths: int, n_steps: int,
                   master_seed: int,
                   checkpoint_times=None) -> PathEnsemble:
    """Simulate the ensemble; deterministic in (master_seed, arguments).

    Checkpoint times must be multiples of the step size; the state at each
    checkpoint is stored for all paths (used by coupled strong-error runs).
    """
    if n_steps < 1 or n_paths < 1:
        raise SimulationError("need n_steps >= 1 and n_paths >= 1")
    dt = 1.0 / n_steps
    sq = np.sqrt(spec.eps) * np.sqrt(dt)

    ckpt_steps = None
    checkpoints = None
    if checkpoint_times is not None:
        checkpoint_times = np.asarray(checkpoint_times, dtype=float)
        ckpt_steps = np.rint(checkpoint_times / dt).astype(int)
        if not np.allclose(ckpt_steps * dt, checkpoint_times, atol=1e-12):
            raise SimulationError(
                "checkpoint times must be multiples of the step size")
        checkpoints = np.empty((len(ckpt_steps), n_paths, 2))

    initial = law.sample(master_seed, n_paths)
    endpoints = np.empty((n_paths, 2))

    for chunk_index, start, stop in rng.chunk_ranges(n_paths):
        x0 = initial[start:stop]
        x = x0.copy()
        # frozen ensembles from a point mass share one diffusion matrix per
        # step; evaluate it once and let broadcasting do the rest
        frozen_point = spec.freeze_at_start and bool(np.all(x0 == x0[:1]))
        if ckpt_steps is not None:
            for c, s in enumerate(ckpt_steps):
                if s == 0:
                    checkpoints[c, start:stop] = x
        for k in range(n_steps):
            tau = 1.0 - k * dt if spec.time_reversed else k * dt
            if frozen_point:
                pos = x0[:1]
            else:
                pos = x0 if spec.freeze_at_start else x
            sig = np.asarray(spec.sigma(tau, pos), dtype=float)
            xi = rng.normal_increments(master_seed, k, chunk_index,
                                       stop - start)
            dx = sq * np.einsum("...ij,...j->...i", sig, xi)
            if spec.drift is not None:
                dx += (spec.eps * dt) * np.asarray(spec.drift(tau, x),
                                                   dtype=float)
            x = x + dx
            if not np.all(np.isfinite(x)):
                bad = int(np.argwhere(~np.isfinite(x).all(axis=1))[0, 0])
                raise SimulationError(
                    f"path {start + bad} became non-finite at step {k}")
            if ckpt_steps is not None:
                for c, s in enumerate(ckpt_steps):
                    if s == k + 1:
                        checkpoints[c, start:stop] = x
        endpoints[start:stop] = x

    return PathEnsemble(
        endpoints=endpoints,
        initial=initial,
        master_seed=master_seed,
        n_steps=n_steps,
        shared_noise_tag=default_noise_tag(master_seed, n_paths, n_steps),
        checkpoint_times=checkpoint_times,
        checkpoints=checkpoints,
        law_mass=law.mass,
        law_description=law.description,
    )


def sde_spec_for_family(family: MetricFamily, eps: float,
                        time_reversed: bool = True, averaged: bool = False,
                        frozen: bool = False,
                        quadrature_nodes: int = 16) -> SdeSpec:
    """Build the process spec whose backward equation is the diffusion PDE.

    ``averaged`` switches to the time-independent averaged coefficients (the
    time argument then has no effect); ``frozen`` yields the Gaussian
    surrogate with sigma pinned to the initial position and no drift.
    """
    coeffs = (averaged_coefficients(family, quadrature_nodes=quadrature_nodes)
              if averaged else coefficients(family))
    return SdeSpec(drift=coeffs.b, sigma=coeffs.sigma, eps=eps,
                   freeze_at_start=frozen, time_reversed=time_reversed)

import numpy as np
import pytest

from mixlab.errors import SolverError
from mixlab.families import EuclideanFamily, MetricFamily, ShearFamily
from mixlab.grid import Grid, GridField, grid_for
from mixlab.pde_checks import (
    averaging_order_check,
    localisation_check,
    self_adjoint_identity_check,
)
from mixlab.regions import disk


def bump_field(grid: Grid, width=0.5) -> GridField:
    ctr = grid.centers()
    vals = np.exp(-(ctr[..., 0] ** 2 + ctr[..., 1] ** 2) / (2 * width ** 2))
    return GridField(vals, grid, np.ones(vals.shape))


class StaticAnisotropic(MetricFamily):
    """Time-independent anisotropic metric (averaging gap must vanish)."""

    time_dependent = False
    euclidean_outside_radius = np.inf

    def inverse_metric(self, t, pts):
        pts = np.asarray(pts, dtype=float)
        m = np.array([[1.5, 0.2], [0.2, 0.9]])
        return np.broadcast_to(m, pts.shape[:-1] + (2, 2)).copy()


class ConstantInSpace(MetricFamily):
    """Spatially constant but time-dependent (commuting operators)."""

    time_dependent = True
    euclidean_outside_radius = np.inf

    def inverse_metric(self, t, pts):
        pts = np.asarray(pts, dtype=float)
        m = np.array([[1.0 + 0.5 * t, 0.0], [0.0, 1.0]])
        return np.broadcast_to(m, pts.shape[:-1] + (2, 2)).copy()


class TestAveragingOrder:
    def test_time_independent_family_gap_vanishes(self):
        g = Grid(-3, 3, -3, 3, 64, 64)
        rep = averaging_order_check(bump_field(g), StaticAnisotropic(),
                                    [4e-3, 2e-3, 1e-3], min_steps=16)
        assert np.all(rep.differences < 1e-13)

    def test_spatially_constant_family_skips_fit(self):
        g = Grid(-3, 3, -3, 3, 64, 64)
        rep = averaging_order_check(bump_field(g), ConstantInSpace(),
                                    [4e-3, 2e-3, 1e-3], min_steps=16)
        assert rep.skipped
        assert rep.slope is None
        # exact per-step averaging puts the gap near rounding (the residue
        # is the explicit stepper's product-vs-average mismatch, O(1/n^2))
        assert np.all(rep.differences < 1e-8)

    def test_needs_three_diffusivities(self):
        g = Grid(-3, 3, -3, 3, 64, 64)
        with pytest.raises(SolverError):
            averaging_order_check(bump_field(g), ShearFamily(), [1e-2, 5e-3])


class TestSelfAdjoint:
    def test_euclidean_disk_gap_at_rounding(self):
        fam = EuclideanFamily()
        g = grid_for(disk(1.0), fam, 1e-3, 256)
        rep = self_adjoint_identity_check(disk(1.0), fam, 1e-3, g)
        assert rep.relative_gap <= 1e-6

    def test_zero_diffusivity_trivial(self):
        fam = EuclideanFamily()
        g = grid_for(disk(1.0), fam, 1e-3, 64)
        rep = self_adjoint_identity_check(disk(1.0), fam, 0.0, g)
        assert rep.lhs == rep.rhs == 0.0


class TestLocalisation:
    def test_far_enclosure_below_solver_floor(self):
        # the enclosure boundary is far beyond the diffusive reach: nothing
        # measurable arrives there
        fam = EuclideanFamily()
        g = grid_for(disk(0.2), fam, 1e-3, 256, halfwidth=3.0)
        rep = localisation_check(disk(0.2), disk(2.5), fam,
                                 [1e-3, 5e-4], g)
        assert np.all(rep.values < 1e-12)

    def test_requires_nesting(self):
        fam = EuclideanFamily()
        g = grid_for(disk(1.0), fam, 1e-3, 64, halfwidth=3.0)
        with pytest.raises(SolverError):
            localisation_check(disk(1.0), disk(0.5), fam, [1e-3, 5e-4], g)

    def test_requires_decreasing_eps(self):
        fam = EuclideanFamily()
        g = grid_for(disk(1.0), fam, 1e-3, 64, halfwidth=3.0)
        with pytest.raises(SolverError):
            localisation_check(disk(0.3), disk(1.0), fam, [5e-4, 1e-3], g)

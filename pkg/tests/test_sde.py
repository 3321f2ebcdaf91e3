import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixlab.errors import SimulationError
from mixlab.families import EuclideanFamily, ShearFamily
from mixlab.grid import grid_for
from mixlab.regions import disk
from mixlab.sde import (
    SdeSpec,
    euler_maruyama,
    indicator_law,
    point_mass_law,
    sde_spec_for_family,
    weighted_indicator_law,
)
from mixlab.sde_stats import heat_content_mc, law_equality_check, strong_error


def zero_sigma(t, pts):
    return np.zeros(pts.shape[:-1] + (2, 2))


def identity_sigma(t, pts):
    out = np.zeros(pts.shape[:-1] + (2, 2))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    return out


class TestEngine:
    def test_no_noise_no_drift_is_identity(self):
        spec = SdeSpec(drift=None, sigma=zero_sigma, eps=1.0)
        law = point_mass_law((0.3, -0.4))
        ens = euler_maruyama(spec, law, 100, 16, master_seed=1)
        assert np.array_equal(ens.endpoints, ens.initial)

    def test_brownian_covariance(self):
        # sigma = I, eps = 1: endpoints - start are standard normal pairs
        spec = SdeSpec(drift=None, sigma=identity_sigma, eps=1.0)
        ens = euler_maruyama(spec, point_mass_law((0, 0)), 100_000, 32,
                             master_seed=7)
        d = ens.endpoints
        cov = np.cov(d.T, ddof=1)
        se = 3.0 * np.sqrt(2.0 / 100_000)
        assert_allclose(cov, np.eye(2), atol=se)
        assert np.all(np.abs(d.mean(axis=0)) <= 3.0 / np.sqrt(100_000))

    def test_linear_drift_exact_ode(self):
        # eps b = -x, no noise: X(1) = X(0) exp(-1) + O(dt)
        spec = SdeSpec(drift=lambda t, p: -p, sigma=zero_sigma, eps=1.0)
        law = point_mass_law((1.0, -2.0))
        ens = euler_maruyama(spec, law, 3, 10_000, master_seed=1)
        assert_allclose(ens.endpoints,
                        np.tile(np.exp(-1.0) * np.array([1.0, -2.0]), (3, 1)),
                        rtol=1e-4)

    def test_determinism_bit_identical(self):
        spec = sde_spec_for_family(ShearFamily(), 1e-2)
        law = indicator_law(disk(1.0))
        a = euler_maruyama(spec, law, 3000, 16, master_seed=42)
        b = euler_maruyama(spec, law, 3000, 16, master_seed=42)
        assert np.array_equal(a.endpoints, b.endpoints)
        assert np.array_equal(a.initial, b.initial)
        c = euler_maruyama(spec, law, 3000, 16, master_seed=43)
        assert not np.array_equal(a.endpoints, c.endpoints)

    def test_time_grid_convention(self):
        # drift programmed to record tau at the first step: forward starts
        # at 0, reversed starts at 1
        seen = []

        def recording_drift(t, pts):
            seen.append(t)
            return np.zeros_like(pts)

        for reversed_flag, first_tau in ((False, 0.0), (True, 1.0)):
            seen.clear()
            spec = SdeSpec(drift=recording_drift, sigma=zero_sigma, eps=1.0,
                           time_reversed=reversed_flag)
            euler_maruyama(spec, point_mass_law((0, 0)), 10, 4, master_seed=0)
            assert seen[0] == first_tau

    def test_frozen_spec_drops_drift(self):
        spec = SdeSpec(drift=lambda t, p: p, sigma=identity_sigma, eps=1.0,
                       freeze_at_start=True)
        assert spec.drift is None

    def test_nonfinite_state_reported(self):
        def exploding(t, pts):
            return np.full_like(pts, np.inf)

        spec = SdeSpec(drift=exploding, sigma=zero_sigma, eps=1.0)
        with pytest.raises(SimulationError, match="step 0"):
            euler_maruyama(spec, point_mass_law((0, 0)), 4, 8, master_seed=0)

    def test_checkpoint_times_must_align(self):
        spec = SdeSpec(drift=None, sigma=identity_sigma, eps=1.0)
        with pytest.raises(SimulationError):
            euler_maruyama(spec, point_mass_law((0, 0)), 4, 8, master_seed=0,
                           checkpoint_times=[0.3])
        ens = euler_maruyama(spec, point_mass_law((0, 0)), 4, 8,
                             master_seed=0, checkpoint_times=[0.0, 0.5, 1.0])
        assert ens.checkpoints.shape == (3, 4, 2)
        assert np.array_equal(ens.checkpoints[0], ens.initial)
        assert np.array_equal(ens.checkpoints[-1], ens.endpoints)


class TestLaws:
    def test_indicator_law_samples_inside(self):
        law = indicator_law(disk(0.7, center=(0.5, 0.5)))
        pts = law.sample(11, 5000)
        assert np.all(np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5) <= 0.7)
        assert abs(law.mass - np.pi * 0.49) < 1e-10
        # uniformity: mean is the center within 3 SE
        se = 0.7 / 2 / np.sqrt(5000)
        assert np.all(np.abs(pts.mean(axis=0) - 0.5) < 3.5 * se)

    def test_indicator_law_deterministic(self):
        law = indicator_law(disk(1.0))
        assert np.array_equal(law.sample(5, 1000), law.sample(5, 1000))

    def test_weighted_law_shifts_mean(self):
        # weight 1 + x/2 on the unit disk: mass pi, mean shifted toward +x
        law = weighted_indicator_law(disk(1.0), lambda p: 1 + 0.5 * p[..., 0])
        assert abs(law.mass - np.pi) < 1e-4
        pts = law.sample(3, 40_000)
        # E[x] = (1/pi) int x (1 + x/2) = (1/(2 pi)) int x^2 = r^4 pi/4 /(2 pi)
        want = 0.125
        assert abs(pts[:, 0].mean() - want) < 0.01


class TestStrongError:
    def test_identical_specs_zero_gap(self):
        spec = sde_spec_for_family(ShearFamily(), 1e-2)
        law = point_mass_law((0.1, 0.0))
        ckpts = np.linspace(0, 1, 5)
        a = euler_maruyama(spec, law, 500, 64, 9, checkpoint_times=ckpts)
        b = euler_maruyama(spec, law, 500, 64, 9, checkpoint_times=ckpts)
        rep = strong_error(a, b)
        assert rep.max_mean_sq_gap == 0.0

    def test_spatially_constant_sigma_frozen_equals_unfrozen(self):
        # sigma depends only on time: freezing at the start changes nothing,
        # so the coupled gap is exactly zero path by path
        def sigma(t, pts):
            out = np.zeros(pts.shape[:-1] + (2, 2))
            out[..., 0, 0] = 1.0 + 0.5 * t
            out[..., 1, 1] = 1.0 - 0.3 * t
            return out

        law = point_mass_law((0.0, 0.0))
        ckpts = np.linspace(0, 1, 5)
        spec = SdeSpec(drift=None, sigma=sigma, eps=0.01)
        frozen = SdeSpec(drift=None, sigma=sigma, eps=0.01,
                         freeze_at_start=True)
        a = euler_maruyama(spec, law, 400, 32, 3, checkpoint_times=ckpts)
        b = euler_maruyama(frozen, law, 400, 32, 3, checkpoint_times=ckpts)
        rep = strong_error(a, b)
        assert rep.max_mean_sq_gap <= 1e-28

    def test_uncoupled_comparison_refused(self):
        spec = sde_spec_for_family(EuclideanFamily(), 1e-2)
        law = point_mass_law((0, 0))
        ckpts = [0.0, 0.5, 1.0]
        a = euler_maruyama(spec, law, 100, 16, 1, checkpoint_times=ckpts)
        b = euler_maruyama(spec, law, 100, 16, 2, checkpoint_times=ckpts)
        with pytest.raises(SimulationError):
            strong_error(a, b)
        c = euler_maruyama(spec, law, 100, 32, 1, checkpoint_times=ckpts)
        with pytest.raises(SimulationError):
            strong_error(a, c)

    def test_coupled_gap_agrees_across_step_counts(self):
        # refining the step count must not move the statistic outside noise;
        # start where the coefficients vary so the gap is non-degenerate
        fam = ShearFamily(plateau_radius=2.0, outer_radius=6.0)
        spec_x = sde_spec_for_family(fam, 0.05)
        spec_y = sde_spec_for_family(fam, 0.05, frozen=True)
        law = point_mass_law((3.5, 0.0))
        ckpts = np.linspace(0, 1, 17)
        reps = []
        for n_steps in (128, 256):
            a = euler_maruyama(spec_x, law, 20_000, n_steps, 5,
                               checkpoint_times=ckpts)
            b = euler_maruyama(spec_y, law, 20_000, n_steps, 5,
                               checkpoint_times=ckpts)
            reps.append(strong_error(a, b))
        assert reps[0].max_mean_sq_gap > 0
        gap = abs(reps[0].max_mean_sq_gap - reps[1].max_mean_sq_gap)
        assert gap <= 3.0 * (reps[0].se_at_max + reps[1].se_at_max)


class TestHeatContentMC:
    def test_zero_eps_exact_zero(self):
        est, se = heat_content_mc(disk(1.0), EuclideanFamily(), 0.0,
                                  n_paths=1000, n_steps=8, seed=3)
        assert est == 0.0

    def test_euclidean_disk_matches_sqrt_law(self):
        eps = 1e-3
        est, se = heat_content_mc(disk(1.0), EuclideanFamily(), eps,
                                  n_paths=200_000, n_steps=64, seed=12)
        want = np.sqrt(eps / np.pi) * 2 * np.pi
        assert abs(est - want) <= 3 * se + 0.002 * want

    def test_weighted_law_matches_weighted_area(self):
        # starting density f 1_S with f = 1 + x/2: the escape mass tends to
        # sqrt(eps/pi) * integral of f over the boundary, which equals the
        # unweighted value here because the linear part cancels on the circle
        from mixlab.mixing_area import mixing_area

        eps = 1e-3
        weight = lambda p: 1.0 + 0.5 * p[..., 0]
        law = weighted_indicator_law(disk(1.0), weight)
        est, se = heat_content_mc(disk(1.0), EuclideanFamily(), eps,
                                  n_paths=200_000, n_steps=64, seed=4,
                                  law=law)

        def gbar(pts):
            return np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()

        want = np.sqrt(eps / np.pi) * mixing_area(disk(1.0), gbar, None, 256,
                                                  weight=weight)
        assert abs(est - want) <= 3 * se + 0.003 * want

    def test_point_law_matches_pde_escape_probability(self):
        # point start: the estimate is the backward-equation solution of the
        # complement indicator, cross-checked against the grid solver
        from mixlab.coefficients import coefficients
        from mixlab.grid import discretize_indicator
        from mixlab.solver import evolve

        fam = ShearFamily()
        eps = 5e-3
        x0 = (0.8, -0.2)
        est, se = heat_content_mc(disk(1.0), fam, eps, n_paths=200_000,
                                  n_steps=256, seed=21,
                                  law=point_mass_law(x0))

        grid = grid_for(disk(1.0), fam, eps, 384)
        u_s = discretize_indicator(disk(1.0), grid, fam)
        comp = u_s.copy_with(1.0 - u_s.values)
        rep = evolve(comp, coefficients(fam), eps)
        want = float(grid.interpolate(rep.final.values, np.array(x0)))
        assert abs(est - want) <= 3 * se + 0.01 * want


class TestLawEquality:
    def test_euclidean_family_gaussian(self):
        rep = law_equality_check(EuclideanFamily(), (0.0, 0.0), 0.01,
                                 n_paths=40_000, seed=8, n_steps=64)
        assert rep.passed
        assert_allclose(rep.target_cov, 0.01 * 2 * np.eye(2), atol=1e-12)

    def test_shear_family_covariance_target(self):
        # target covariance is eps * abar(x0) with abar = 2 * [[4/3, -1/2],
        # [-1/2, 1]] on the plateau
        eps = 0.01
        rep = law_equality_check(ShearFamily(), (0.0, 0.0), eps,
                                 n_paths=60_000, seed=6, n_steps=512)
        want = eps * 2.0 * np.array([[4.0 / 3.0, -0.5], [-0.5, 1.0]])
        assert_allclose(rep.target_cov, want, rtol=1e-10)
        assert rep.passed
        assert rep.gaussian_ok

    def test_single_path_inconclusive(self):
        rep = law_equality_check(EuclideanFamily(), (0.0, 0.0), 0.01,
                                 n_paths=1, seed=5, n_steps=16)
        assert rep.inconclusive
        assert rep.passed is None

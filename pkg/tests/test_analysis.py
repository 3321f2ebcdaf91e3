import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixlab.analysis import coherence_ratio, fit_asymptotics
from mixlab.errors import ConfigError
from mixlab.families import EuclideanFamily, ShearFamily
from mixlab.grid import grid_for
from mixlab.regions import disk, ellipse


def disk_heat_content_exact(eps, radius=1.0):
    """Escape mass of the unit-diffusivity-eps kernel from a disk (oracle)."""
    from scipy import stats
    from scipy.integrate import quad

    def integrand(r):
        return 2 * np.pi * r * stats.ncx2.sf(
            radius ** 2 / (2 * eps), 2, r * r / (2 * eps))

    val, _ = quad(integrand, 0, radius, limit=200)
    return val


class TestFit:
    def test_exact_model_recovery(self):
        eps = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
        meas = [(e, 0.5 * np.sqrt(e), None) for e in eps]
        rep = fit_asymptotics(meas, area=0.5 * np.sqrt(np.pi))
        assert abs(rep.c1 - 0.5) < 1e-14
        assert abs(rep.c2) < 1e-12
        assert rep.relative_gap < 1e-13

    def test_noisy_recovery_within_interval(self):
        rng = np.random.default_rng(0)
        eps = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
        sigma = 1e-4
        meas = [(e, 0.5 * np.sqrt(e) + 0.3 * e + rng.normal(0, sigma), sigma)
                for e in eps]
        rep = fit_asymptotics(meas, area=0.5 * np.sqrt(np.pi))
        assert abs(rep.c1 - 0.5) <= 3 * rep.c1_se
        assert abs(rep.c2 - 0.3) <= 3 * rep.c2_se

    def test_scale_consistency(self):
        eps = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
        values = 0.7 * np.sqrt(eps) + 0.2 * eps
        rep1 = fit_asymptotics([(e, v, None) for e, v in zip(eps, values)],
                               area=1.0)
        rep2 = fit_asymptotics([(e, 10 * v, None) for e, v in zip(eps, values)],
                               area=1.0)
        assert_allclose(rep2.c1, 10 * rep1.c1, rtol=1e-13)
        assert_allclose(rep2.c2, 10 * rep1.c2, rtol=1e-12)

    def test_rejects_degenerate_designs(self):
        with pytest.raises(ConfigError):
            fit_asymptotics([(1e-2, 0.1, None)] * 4, area=1.0)  # repeated eps
        with pytest.raises(ConfigError):
            fit_asymptotics([(1e-2, 0.1, None), (9e-3, 0.09, None),
                             (8e-3, 0.08, None), (7e-3, 0.07, None)],
                            area=1.0)  # less than a decade
        with pytest.raises(ConfigError):
            fit_asymptotics([(1e-2, 0.1, None), (1e-3, 0.03, None),
                             (1e-4, 0.01, None)], area=1.0)  # too few

    def test_weighted_fit_uses_sigmas(self):
        eps = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4])
        meas = [(e, 0.5 * np.sqrt(e), 1e-3 * np.sqrt(e)) for e in eps]
        rep = fit_asymptotics(meas, area=0.5 * np.sqrt(np.pi))
        # exact data: parameter covariance comes from the stated sigmas
        assert rep.c1_se > 0
        assert abs(rep.c1 - 0.5) < 1e-12

    def test_refinement_monotonicity_on_exact_disk_values(self):
        # fits on exact heat-content values: shifting the diffusivity grid
        # down must shrink the gap to the geometric prediction
        grids = [np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4]),
                 np.array([5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4])]
        gaps = []
        for eps in grids:
            meas = [(e, disk_heat_content_exact(e), None) for e in eps]
            gaps.append(fit_asymptotics(meas, area=2 * np.pi).relative_gap)
        assert gaps[1] < gaps[0]


class TestCoherence:
    def test_no_diffusion_is_exactly_two(self):
        g = grid_for(disk(1.0), EuclideanFamily(), 1e-2, 64)
        for backend in ("pde", "mc"):
            rep = coherence_ratio(EuclideanFamily(), disk(1.0), 0.0,
                                  backend=backend, grid=g, n_paths=100,
                                  n_steps=4, seed=1)
            assert rep.value == 2.0
            assert rep.fraction_set == 1.0

    def test_euclidean_disk_expansion(self):
        # leading order: 2 - sqrt(eps/pi) * 2 pi * (1/pi + 1/(100 - pi)) on
        # the 10 x 10 truncation rectangle
        eps = 1e-3
        g = grid_for(disk(1.0), EuclideanFamily(), eps, 256, halfwidth=5.0)
        rep = coherence_ratio(EuclideanFamily(), disk(1.0), eps,
                              backend="pde", grid=g)
        want = 2 - np.sqrt(eps / np.pi) * 2 * np.pi * (
            1 / np.pi + 1 / (100 - np.pi))
        assert abs(rep.value - want) < 0.05 * want
        assert rep.mass_complement == pytest.approx(100 - np.pi, rel=1e-3)
        assert rep.truncation_halfwidth == 5.0

    def test_pde_and_mc_backends_agree(self):
        eps = 2e-3
        fam = EuclideanFamily()
        g = grid_for(disk(1.0), fam, eps, 256, halfwidth=5.0)
        rep_pde = coherence_ratio(fam, disk(1.0), eps, backend="pde", grid=g)
        rep_mc = coherence_ratio(fam, disk(1.0), eps, backend="mc", grid=g,
                                 n_paths=150_000, n_steps=64, seed=9)
        assert abs(rep_pde.value - rep_mc.value) <= \
            3 * rep_mc.standard_error + 5e-3

    def test_lower_boundary_area_is_more_coherent(self):
        # equal-mass regions: the one with the smaller boundary area keeps
        # a larger coherence ratio at small diffusivity
        eps = 4e-3
        fam = EuclideanFamily()
        round_region = disk(0.8)
        stretched = ellipse(1.2, 0.64 / 1.2)  # same enclosed area
        g1 = grid_for(round_region, fam, eps, 384, halfwidth=5.0)
        g2 = grid_for(stretched, fam, eps, 384, halfwidth=5.0)
        r1 = coherence_ratio(fam, round_region, eps, backend="pde", grid=g1)
        r2 = coherence_ratio(fam, stretched, eps, backend="pde", grid=g2)
        assert abs(r1.mass_set - r2.mass_set) < 1e-3
        assert r1.value > r2.value

    def test_shear_family_runs(self):
        eps = 1e-3
        fam = ShearFamily()
        g = grid_for(disk(1.0), fam, eps, 256)
        rep = coherence_ratio(fam, disk(1.0), eps, backend="pde", grid=g)
        assert 0 <= rep.fraction_set <= 1 + 1e-9
        assert 1.8 < rep.value < 2.0

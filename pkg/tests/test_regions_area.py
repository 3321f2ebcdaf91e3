import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixlab.errors import GeometryError
from mixlab.families import EuclideanFamily, ShearFamily
from mixlab.mixing_area import mixing_area, mixing_area_for_family
from mixlab.regions import (
    disk,
    ellipse,
    polygon_region,
    region_area,
    square,
    validate_region,
)


def euclidean_gbar(pts):
    pts = np.asarray(pts, dtype=float)
    return np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2)).copy()


def constant_gbar(matrix):
    m = np.asarray(matrix, dtype=float)

    def gbar(pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(m, pts.shape[:-1] + (2, 2)).copy()

    return gbar


class TestRegions:
    def test_disk_indicator_and_boundary_consistent(self):
        validate_region(disk(1.0))
        validate_region(disk(0.5, center=(0.3, -0.2)))

    def test_ellipse_and_polygon_consistent(self):
        validate_region(ellipse(1.5, 0.7, angle=0.4))
        validate_region(polygon_region([(0, 0), (2, 0), (2, 1), (0, 1)]))

    def test_polygon_rejects_clockwise(self):
        with pytest.raises(GeometryError):
            polygon_region([(0, 0), (0, 1), (1, 1), (1, 0)])

    def test_region_area_disk_and_polygon(self):
        assert_allclose(region_area(disk(1.0)), np.pi, rtol=1e-12)
        assert_allclose(region_area(disk(0.5, center=(2.0, 1.0))),
                        np.pi * 0.25, rtol=1e-12)
        assert_allclose(region_area(square(2.0)), 4.0, rtol=1e-12)

    def test_indicator_vectorized(self):
        reg = polygon_region([(0, 0), (1, 0), (1, 1), (0, 1)])
        pts = np.array([[0.5, 0.5], [1.5, 0.5], [-0.1, 0.2]])
        assert list(reg.contains(pts)) == [True, False, False]


class TestMixingArea:
    def test_euclidean_circle_perimeter(self):
        got = mixing_area(disk(1.0), euclidean_gbar, None, boundary_nodes=64)
        assert_allclose(got, 2 * np.pi, rtol=1e-12)

    def test_radius_scaling(self):
        for r in (0.5, 2.0, 3.7):
            got = mixing_area(disk(r), euclidean_gbar, None, 64)
            assert_allclose(got, 2 * np.pi * r, rtol=1e-12)

    def test_anisotropic_unit_square(self):
        # gbar = diag(4, 1) on the unit square: the metric-unit normal on the
        # vertical edges is (1/2, 0), contributing 1/2 each; horizontal edges
        # contribute 1 each.  Total 3.
        got = mixing_area(square(1.0), constant_gbar(np.diag([4.0, 1.0])),
                          None, boundary_nodes=64)
        assert_allclose(got, 3.0, rtol=1e-12)

    def test_density_weighting(self):
        def rho(pts):
            return 2.0 * np.ones(pts.shape[:-1])

        got = mixing_area(disk(1.0), euclidean_gbar, rho, 64)
        assert_allclose(got, 4 * np.pi, rtol=1e-12)

    def test_weighted_variant(self):
        # weight f(x, y) = 1 + x/2 on the unit circle: closed form is
        # int (1 + cos(theta)/2) d theta = 2 pi.
        def f(pts):
            return 1.0 + 0.5 * pts[..., 0]

        got = mixing_area(disk(1.0), euclidean_gbar, None, 128, weight=f)
        assert_allclose(got, 2 * np.pi, rtol=1e-12)

    def test_reparametrization_invariance(self):
        base = disk(1.0)
        # same circle traversed at non-constant speed
        def warp(s):
            s = np.asarray(s, dtype=float)
            return s + 0.1 * np.sin(2 * np.pi * s) / (2 * np.pi)

        def dwarp(s):
            s = np.asarray(s, dtype=float)
            return 1.0 + 0.1 * np.cos(2 * np.pi * s)

        warped = disk(1.0)
        warped = type(warped)(
            indicator=base.indicator,
            curve=lambda s: base.curve(warp(s)),
            tangent=lambda s: base.tangent(warp(s)) * dwarp(s)[..., None],
            bounding_box=base.bounding_box,
            name="warped disk",
        )
        gbar = constant_gbar([[1.4, 0.3], [0.3, 0.9]])
        a1 = mixing_area(base, gbar, None, 256)
        a2 = mixing_area(warped, gbar, None, 256)
        assert abs(a1 - a2) / a1 < 1e-8

    def test_convergence_order_at_least_two(self):
        # anisotropic metric on a circle: composite Gauss panels converge
        # fast; check the error at least quarters when panels double.
        gbar = constant_gbar([[2.0, 0.5], [0.5, 1.0]])
        ref = mixing_area(disk(1.0), gbar, None, 512)
        errs = [abs(mixing_area(disk(1.0), gbar, None, n) - ref)
                for n in (4, 8, 16)]
        assert errs[1] <= errs[0] / 4 + 1e-15
        assert errs[2] <= errs[1] / 4 + 1e-15

    def test_shear_family_disk_area_against_norm_formula(self):
        # For a constant metric, eliminating the normal gives the equivalent
        # form dA = sqrt(c'^T gbar c') / sqrt(det gbar) ds; integrate that
        # independently with scipy quadrature and compare.
        from scipy.integrate import quad

        area = mixing_area_for_family(disk(1.0), ShearFamily(), 256)
        gbar = 12.0 / 13.0 * np.array([[1.0, 0.5], [0.5, 4.0 / 3.0]])

        def integrand(s):
            tang = 2 * np.pi * np.array([-np.sin(2 * np.pi * s),
                                         np.cos(2 * np.pi * s)])
            return np.sqrt(tang @ gbar @ tang / np.linalg.det(gbar))

        want, _ = quad(integrand, 0.0, 1.0, limit=200)
        assert_allclose(area, want, rtol=1e-9)
        evals = np.linalg.eigvalsh(gbar)
        assert 2 * np.pi / np.sqrt(evals[1]) <= area <= 2 * np.pi / np.sqrt(evals[0])

    def test_euclidean_family_helper(self):
        got = mixing_area_for_family(disk(1.0), EuclideanFamily(), 64)
        assert_allclose(got, 2 * np.pi, rtol=1e-12)

    def test_degenerate_tangent_raises(self):
        base = disk(1.0)
        bad = type(base)(
            indicator=base.indicator,
            curve=base.curve,
            tangent=lambda s: np.zeros(np.shape(s) + (2,)),
            bounding_box=base.bounding_box,
        )
        with pytest.raises(GeometryError):
            mixing_area(bad, euclidean_gbar, None, 16)

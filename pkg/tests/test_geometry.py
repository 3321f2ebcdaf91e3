import numpy as np
import pytest
from numpy.testing import assert_allclose

from mixlab.errors import GeometryError
from mixlab.families import (
    DiagTimeFamily,
    EuclideanFamily,
    MetricFamily,
    RotatingGyreFamily,
    ShearFamily,
    averaged_inverse_metric,
    averaged_metric,
    make_family,
    pullback_family,
)
from mixlab.coefficients import averaged_coefficients, coefficients
from mixlab.spd import SPD2, inv2x2, max_eig2x2, sym_sqrt2x2

# Hand-derived values for the steady-shear metric family, valid on the
# plateau where the cutoff is identically 1:
#   g_t = [[1, t], [t, 1 + t^2]],  g_t^{-1} = [[1 + t^2, -t], [-t, 1]]
#   int_0^1 g_t^{-1} dt = [[4/3, -1/2], [-1/2, 1]]  (det = 13/12)
SHEAR_INT_INV = np.array([[4.0 / 3.0, -0.5], [-0.5, 1.0]])
SHEAR_AVG_METRIC = 12.0 / 13.0 * np.array([[1.0, 0.5], [0.5, 4.0 / 3.0]])


class TestSPD2:
    def test_rejects_non_positive_definite(self):
        with pytest.raises(GeometryError):
            SPD2(-1.0, 0.0, 1.0)
        with pytest.raises(GeometryError):
            SPD2(1.0, 2.0, 1.0)  # det = -3

    def test_inverse_and_sqrt(self):
        m = SPD2(2.0, -1.0, 1.0)
        assert_allclose(m.inv().matrix @ m.matrix, np.eye(2), atol=1e-14)
        root = m.sqrt().matrix
        assert_allclose(root @ root, m.matrix, atol=1e-13)

    def test_from_matrix_requires_symmetry(self):
        with pytest.raises(GeometryError):
            SPD2.from_matrix([[1.0, 0.2], [0.1, 1.0]])


def test_sym_sqrt_matches_product_on_random_spd():
    rng = np.random.default_rng(7)
    basis = rng.standard_normal((200, 2, 2))
    spd = basis @ np.swapaxes(basis, -1, -2) + 0.05 * np.eye(2)
    root = sym_sqrt2x2(spd)
    assert_allclose(root @ root, spd, atol=1e-12)
    assert_allclose(root, np.swapaxes(root, -1, -2), atol=1e-14)


def test_max_eig_closed_form():
    rng = np.random.default_rng(11)
    basis = rng.standard_normal((50, 2, 2))
    spd = basis @ np.swapaxes(basis, -1, -2) + 0.1 * np.eye(2)
    expected = np.linalg.eigvalsh(spd)[..., -1]
    assert_allclose(max_eig2x2(spd), expected, rtol=1e-12)


class TestAveragedMetric:
    def test_identity_family(self):
        fam = EuclideanFamily()
        assert_allclose(averaged_metric(fam, (0.3, -0.7)).matrix, np.eye(2),
                        atol=1e-14)

    def test_diag_time_closed_form(self):
        # g_t = diag(1/(1+t), 1): integral of the inverse is diag(3/2, 1)
        fam = DiagTimeFamily(plateau_radius=2.0, outer_radius=3.0)
        got = averaged_metric(fam, (0.1, 0.2)).matrix
        assert_allclose(got, np.diag([2.0 / 3.0, 1.0]), rtol=1e-12)

    def test_shear_closed_form(self):
        fam = ShearFamily()
        x = np.array([0.4, -0.3])
        assert_allclose(averaged_inverse_metric(fam, x), SHEAR_INT_INV,
                        rtol=1e-12)
        assert_allclose(averaged_metric(fam, x).matrix, SHEAR_AVG_METRIC,
                        rtol=1e-12)

    def test_time_independent_family_is_fixed_point(self):
        class Static(MetricFamily):
            time_dependent = False
            euclidean_outside_radius = np.inf

            def metric(self, t, pts):
                pts = np.asarray(pts, dtype=float)
                m = np.array([[2.0, 0.3], [0.3, 1.5]])
                return np.broadcast_to(m, pts.shape[:-1] + (2, 2)).copy()

        got = averaged_metric(Static(), (0.0, 0.0)).matrix
        assert_allclose(got, [[2.0, 0.3], [0.3, 1.5]], rtol=1e-14)

    def test_conjugation_covariance(self):
        # For h_t = C^T g_t C with constant invertible C, the average obeys
        # averaged(h) = C^T averaged(g) C.
        rng = np.random.default_rng(3)
        shear = ShearFamily()
        for _ in range(5):
            c = rng.standard_normal((2, 2))
            while abs(np.linalg.det(c)) < 0.3:
                c = rng.standard_normal((2, 2))

            class Conjugated(MetricFamily):
                euclidean_outside_radius = np.inf

                def metric(self, t, pts):
                    return c.T @ shear.metric(t, pts) @ c

            x = rng.standard_normal(2) * 0.5
            got = averaged_metric(Conjugated(), x).matrix
            want = c.T @ averaged_metric(shear, x).matrix @ c
            assert_allclose(got, want, rtol=1e-10)

    def test_requires_at_least_two_nodes(self):
        with pytest.raises(GeometryError):
            averaged_metric(EuclideanFamily(), (0, 0), quadrature_nodes=1)

    def test_rotating_gyre_average_matches_closed_form(self):
        fam = RotatingGyreFamily(amplitude=1.3, radius=2.5)
        pts = np.array([[0.0, 0.0], [0.5, 0.4], [1.5, -0.2], [3.0, 0.0]])
        got = averaged_inverse_metric(fam, pts, quadrature_nodes=24)
        assert_allclose(got, fam.averaged_inverse_metric_exact(pts),
                        atol=1e-10)


class TestCoefficients:
    def test_euclidean(self):
        coeff = coefficients(EuclideanFamily())
        pts = np.array([[0.0, 0.0], [1.2, -3.4]])
        assert_allclose(coeff.a(0.5, pts),
                        np.broadcast_to(2.0 * np.eye(2), (2, 2, 2)),
                        atol=1e-14)
        assert_allclose(coeff.b(0.5, pts), 0.0, atol=1e-9)
        sig = coeff.sigma(0.5, pts)
        assert_allclose(sig @ np.swapaxes(sig, -1, -2),
                        np.broadcast_to(2.0 * np.eye(2), (2, 2, 2)),
                        atol=1e-12)

    def test_linear_inverse_metric_drift(self):
        # g^{-1} = diag(1 + x, 1), rho = 1  =>  b = (1, 0), a = 2 diag(1+x, 1)
        class Linear(MetricFamily):
            euclidean_outside_radius = np.inf

            def inverse_metric(self, t, pts):
                pts = np.asarray(pts, dtype=float)
                out = np.zeros(pts.shape[:-1] + (2, 2))
                out[..., 0, 0] = 1.0 + pts[..., 0]
                out[..., 1, 1] = 1.0
                return out

        coeff = coefficients(Linear())
        pts = np.array([[0.3, 0.1], [-0.2, 0.5]])
        assert_allclose(coeff.b(0.0, pts), [[1.0, 0.0], [1.0, 0.0]],
                        atol=1e-7)
        assert_allclose(coeff.a(0.0, pts)[..., 0, 0], 2.0 * (1 + pts[..., 0]))

    def test_symbolic_expansion_matches_convention(self):
        # Expand div_rho(G grad u) symbolically for G = diag(1 + x, 1) and
        # match it against b . grad u + (1/2) a : hess u.
        sympy = pytest.importorskip("sympy")
        x, y = sympy.symbols("x y")
        u = sympy.Function("u")(x, y)
        g11, g22 = 1 + x, sympy.Integer(1)
        divergence_form = (sympy.diff(g11 * sympy.diff(u, x), x)
                           + sympy.diff(g22 * sympy.diff(u, y), y))
        a11, a22 = 2 * g11, 2 * g22
        b1 = sympy.diff(g11, x)
        nondivergence = (b1 * sympy.diff(u, x)
                         + sympy.Rational(1, 2) * (a11 * sympy.diff(u, x, 2)
                                                   + a22 * sympy.diff(u, y, 2)))
        assert sympy.simplify(divergence_form - nondivergence) == 0

    def test_shear_plateau_values(self):
        coeff = coefficients(ShearFamily())
        pts = np.array([[0.2, -0.1]])
        assert_allclose(coeff.a(1.0, pts)[0], 2.0 * np.array([[2.0, -1.0],
                                                              [-1.0, 1.0]]),
                        rtol=1e-12)
        # coefficients are spatially constant on the plateau, so b = 0 there
        assert_allclose(coeff.b(1.0, pts)[0], [0.0, 0.0], atol=1e-9)
        assert_allclose(coeff.b(0.37, pts)[0], [0.0, 0.0], atol=1e-9)

    def test_outside_ball_is_euclidean(self):
        coeff = coefficients(ShearFamily(plateau_radius=2.0, outer_radius=3.0))
        pts = np.array([[3.5, 0.0], [0.0, -4.0]])
        assert_allclose(coeff.a(0.7, pts),
                        np.broadcast_to(2.0 * np.eye(2), (2, 2, 2)),
                        atol=1e-14)
        assert_allclose(coeff.b(0.7, pts), 0.0, atol=0.0)

    def test_averaged_coefficients_shear(self):
        coeff = averaged_coefficients(ShearFamily())
        pts = np.array([[0.0, 0.0]])
        assert_allclose(coeff.a(0.0, pts)[0], 2.0 * SHEAR_INT_INV, rtol=1e-12)
        assert_allclose(coeff.b(0.0, pts)[0], [0.0, 0.0], atol=1e-9)
        assert not coeff.time_dependent

    def test_average_consistency_with_averaged_metric(self):
        # abar = 2 gbar^{-1} pointwise: linearity of the time integral.
        fam = RotatingGyreFamily()
        pts = np.array([[0.4, 0.9], [1.1, -0.6]])
        abar = averaged_coefficients(fam).a(0.0, pts)
        gbar_inv = averaged_inverse_metric(fam, pts)
        assert_allclose(abar, 2.0 * gbar_inv, rtol=1e-12)

    def test_analytic_drift_matches_finite_differences(self):
        # dual route: the gyre's closed-form drift against the generic
        # central-difference divergence
        fam = RotatingGyreFamily()
        fd = coefficients(fam, force_fd_drift=True)
        an = coefficients(fam)
        rng = np.random.default_rng(9)
        pts = rng.uniform(-2.4, 2.4, size=(200, 2))
        for t in (0.2, 0.55, 0.9):
            assert_allclose(an.b(t, pts), fd.b(t, pts), atol=5e-8)

    def test_sigma_matches_a_everywhere(self):
        fam = RotatingGyreFamily()
        coeff = coefficients(fam)
        rng = np.random.default_rng(5)
        pts = rng.uniform(-3, 3, size=(100, 2))
        for t in (0.0, 0.31, 0.77):
            sig = coeff.sigma(t, pts)
            assert_allclose(sig @ np.swapaxes(sig, -1, -2), coeff.a(t, pts),
                            atol=1e-12)


class TestPullback:
    def test_zero_velocity_gives_identity(self):
        fam = pullback_family(lambda t, p: np.zeros_like(p), 1.0)
        pts = np.array([[0.2, 0.4]])
        assert_allclose(fam.metric(1.0, pts)[0], np.eye(2), atol=1e-13)

    def test_steady_shear_closed_form(self):
        # V = (y, 0): the flow map Jacobian is [[1, t], [0, 1]] exactly, so
        # g_t = [[1, t], [t, 1 + t^2]].
        def velocity(t, pts):
            out = np.zeros_like(pts)
            out[..., 0] = pts[..., 1]
            return out

        fam = pullback_family(velocity, 10.0)
        pts = np.array([[0.3, -0.2], [1.0, 2.0]])
        for t in (0.25, 0.5, 1.0):
            want = np.array([[1.0, t], [t, 1.0 + t * t]])
            assert_allclose(fam.metric(t, pts), np.broadcast_to(want, (2, 2, 2)),
                            rtol=1e-9, atol=1e-9)

    def test_divergence_free_bump_flow_preserves_volume(self):
        # velocity = perpendicular gradient of a C^3 stream bump; the flow is
        # area preserving, so det g_t = det(DPhi^T DPhi) = 1.
        radius = 2.0

        def stream_grad(pts):
            r2 = (pts[..., 0] ** 2 + pts[..., 1] ** 2) / radius ** 2
            inside = np.maximum(1.0 - r2, 0.0)
            base = -8.0 * inside ** 3 / radius ** 2
            return base[..., None] * pts

        def velocity(t, pts):
            grad = stream_grad(pts)
            return (1.0 + 0.5 * np.sin(2 * np.pi * t)) * np.stack(
                [-grad[..., 1], grad[..., 0]], axis=-1)

        fam = pullback_family(velocity, radius)
        rng = np.random.default_rng(2)
        pts = rng.uniform(-1.5, 1.5, size=(40, 2))
        for t in (0.3, 1.0):
            g = fam.metric(t, pts)
            det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
            assert_allclose(det, 1.0, atol=1e-6)

    def test_marcher_matches_direct_evaluation(self):
        def velocity(t, pts):
            out = np.zeros_like(pts)
            out[..., 0] = pts[..., 1]
            return out

        fam = pullback_family(velocity, 10.0)
        pts = np.array([[0.1, 0.7], [-0.4, 0.2]])
        marcher = fam.make_marcher(pts)
        for t in (0.1, 0.4, 0.9, 0.5):  # includes one backward move
            assert_allclose(marcher.inverse_metric(t),
                            inv2x2(fam.metric(t, pts)), rtol=1e-8, atol=1e-8)


def test_make_family_registry():
    assert make_family("euclidean").name == "euclidean"
    assert make_family("shear_pullback").name == "shear_pullback"
    assert make_family("rotating_gyre", amplitude=1.0).amplitude == 1.0
    with pytest.raises(GeometryError):
        make_family("nope")


def test_velocity_defined_family_from_registry():
    fam = make_family("bump_gyre_flow", strength=0.8, radius=2.0,
                      steps_per_unit=128)
    pts = np.array([[0.5, 0.3], [2.5, 0.0]])
    g = fam.metric(0.7, pts)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    assert_allclose(det, 1.0, atol=1e-7)          # volume preserving
    assert_allclose(g[1], np.eye(2), atol=1e-12)  # Euclidean outside

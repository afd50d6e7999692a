import numpy as np
import pytest
from scipy.integrate import quad

from robin_spectra import geometry as geo
from robin_spectra.errors import AmbiguousMaximum, DegenerateCurve


def ellipse_k_theta(theta, a=2.0, b=1.0):
    return a * b / (a**2 * np.sin(theta) ** 2 + b**2 * np.cos(theta) ** 2) ** 1.5


class TestFromFourier:
    def test_unit_circle_closed_regular(self, circle_geom):
        assert circle_geom.L == pytest.approx(2 * np.pi, abs=1e-12)

    def test_ellipse_length_against_quadrature_oracle(self):
        curve = geo.from_fourier(*geo.shape_fourier("ellipse:2,1"))
        geom = geo.arclength_resample(curve, 128)
        # independent oracle: adaptive quadrature of |dgamma/dtheta|
        speed = lambda th: np.hypot(-2.0 * np.sin(th), np.cos(th))
        L_ref, err = quad(speed, 0.0, 2 * np.pi, limit=200)
        assert err < 1e-9
        assert geom.L == pytest.approx(L_ref, abs=1e-9)
        assert geom.L == pytest.approx(9.688448, abs=5e-7)

    def test_zero_coefficients_degenerate(self):
        with pytest.raises(DegenerateCurve):
            geo.from_fourier([(0.0, 0.0)], [(0.0, 0.0)])

    def test_cusp_curve_degenerate(self):
        # deltoid: parametric speed vanishes at theta = 0
        with pytest.raises(DegenerateCurve):
            geo.from_fourier([(0, 0), (2, 0), (1, 0)], [(0, 0), (0, 2), (0, -1)])

    def test_nonfinite_coefficients_rejected(self):
        with pytest.raises(ValueError):
            geo.from_fourier([(0, 0), (np.inf, 0)], [(0, 0), (0, 1)])


class TestArclengthResample:
    def test_circle_curvature_and_normal(self, circle_geom):
        assert np.allclose(circle_geom.k, 1.0, atol=1e-12)
        # outward normal of the unit circle is the position itself
        assert np.max(np.abs(circle_geom.nu - circle_geom.gamma)) < 1e-12

    def test_circle_radius_two_curvature(self):
        g = geo.arclength_resample(geo.from_fourier(*geo.shape_fourier("circle:2")), 128)
        assert np.allclose(g.k, 0.5, atol=1e-12)
        assert g.L == pytest.approx(4 * np.pi, abs=1e-10)

    def test_ellipse_curvature_closed_form(self, ellipse_geom):
        theta = ellipse_geom.theta_of_s(ellipse_geom.s_grid)
        assert np.max(np.abs(ellipse_geom.k - ellipse_k_theta(theta))) < 1e-10
        # extreme values: a/b^2 at the major vertex, b/a^2 at the minor
        assert ellipse_geom.k.max() == pytest.approx(2.0, abs=1e-6)
        assert ellipse_geom.k.min() == pytest.approx(0.25, abs=1e-6)

    def test_ellipse_curvature_derivative_closed_form(self, ellipse_geom):
        theta = ellipse_geom.theta_of_s(ellipse_geom.s_grid)
        k_theta = -9.0 * np.sin(2 * theta) / (1.0 + 3.0 * np.sin(theta) ** 2) ** 2.5
        speed = np.sqrt(4.0 * np.sin(theta) ** 2 + np.cos(theta) ** 2)
        assert np.max(np.abs(ellipse_geom.k1 - k_theta / speed)) < 1e-10

    def test_unit_speed_at_grid(self, ellipse_geom):
        tau = ellipse_geom.tangent(ellipse_geom.s_grid)
        assert np.max(np.abs(np.hypot(tau[:, 0], tau[:, 1]) - 1.0)) < 1e-12
        # cumulative arclength residual of the inversion
        s_back = ellipse_geom._cumlen(ellipse_geom.theta_of_s(ellipse_geom.s_grid))
        assert np.max(np.abs(s_back - ellipse_geom.s_grid)) < geo.TOL_GEO

    def test_frenet_residual_second_order(self):
        curve = geo.from_fourier(*geo.shape_fourier("ellipse:2,1"))
        res = []
        for n_s in (256, 512):
            g = geo.arclength_resample(curve, n_s)
            nu_prime = (np.roll(g.nu, -1, axis=0) - np.roll(g.nu, 1, axis=0)) / (2 * g.h_s)
            tau = np.column_stack([-g.nu[:, 1], g.nu[:, 0]])  # gamma' from nu
            res.append(np.max(np.abs(nu_prime - g.k[:, None] * tau)))
        ratio = res[0] / res[1]
        assert 4.0 * 0.75 < ratio < 4.0 * 1.25

    def test_turning_number(self, circle_geom, ellipse_geom):
        for g in (circle_geom, ellipse_geom):
            total = np.sum(g.k) * g.h_s / (2 * np.pi)
            assert abs(total - 1.0) <= 10 * geo.TOL_GEO

    def test_clockwise_input_reoriented(self):
        g = geo.arclength_resample(geo.from_fourier([(0, 0), (1, 0)], [(0, 0), (0, -1)]), 128)
        assert np.allclose(g.k, 1.0, atol=1e-12)

    def test_resample_idempotence_circle(self, circle_geom):
        again = geo.arclength_resample(circle_geom.curve, 256)
        assert np.max(np.abs(again.k - circle_geom.k)) <= geo.TOL_GEO

    def test_periodic_wrap_evaluation(self, ellipse_geom):
        s = np.array([0.3, 1.7])
        assert np.allclose(
            ellipse_geom.point(s), ellipse_geom.point(s + ellipse_geom.L), atol=1e-10
        )

    def test_small_n_s_rejected(self, circle_geom):
        with pytest.raises(ValueError):
            geo.arclength_resample(circle_geom.curve, 32)


class TestMaxCurvature:
    def test_circle_constant(self, circle_geom, circle_arc):
        info = geo.max_curvature_on_arc(circle_geom, circle_arc)
        assert info.location_class == "constant"
        assert info.k_star == pytest.approx(1.0, abs=1e-10)
        assert info.m == 0

    def test_endpoint_slope_case(self, ellipse_endpoint):
        g, arc = ellipse_endpoint
        info = geo.max_curvature_on_arc(g, arc)
        assert info.location_class == "endpoint_0"
        assert info.m == 1
        assert info.dm < 0.0
        # oracle: closed-form derivative at theta = phase_origin
        theta0 = 0.4
        k_theta = -9.0 * np.sin(2 * theta0) / (1.0 + 3.0 * np.sin(theta0) ** 2) ** 2.5
        speed = np.sqrt(4.0 * np.sin(theta0) ** 2 + np.cos(theta0) ** 2)
        assert info.dm == pytest.approx(k_theta / speed, rel=1e-9)

    def test_endpoint_flat_vertex_case(self):
        g = geo.arclength_resample(
            geo.from_fourier(*geo.shape_fourier("ellipse:2,1"), phase_origin=0.0), 512
        )
        info = geo.max_curvature_on_arc(g, geo.RobinArc(ell=2.0))
        assert info.location_class == "endpoint_0"
        assert info.m == 2
        assert info.k_star == pytest.approx(2.0, abs=1e-10)
        assert info.dm == pytest.approx(-18.0, rel=1e-8)

    def test_interior_vertex_case(self, ellipse_interior):
        g, arc = ellipse_interior
        info = geo.max_curvature_on_arc(g, arc)
        assert info.location_class == "interior"
        assert info.m == 2
        assert info.k_star == pytest.approx(2.0, abs=1e-10)
        assert info.dm == pytest.approx(-18.0, rel=1e-8)
        assert info.dm < 0.0

    def test_endpoint_ell_case(self):
        g = geo.arclength_resample(
            geo.from_fourier(*geo.shape_fourier("ellipse:2,1"), phase_origin=1.6), 512
        )
        info = geo.max_curvature_on_arc(g, geo.RobinArc(ell=2.2))
        assert info.location_class == "endpoint_ell"
        assert info.m == 1
        assert info.dm > 0.0

    def test_two_vertices_ambiguous(self):
        g = geo.arclength_resample(
            geo.from_fourier(*geo.shape_fourier("ellipse:2,1"), phase_origin=-0.4), 512
        )
        with pytest.raises(AmbiguousMaximum):
            geo.max_curvature_on_arc(g, geo.RobinArc(ell=0.8 * g.L))

    def test_k_star_stable_under_doubling(self, ellipse_endpoint):
        g, arc = ellipse_endpoint
        info = geo.max_curvature_on_arc(g, arc)
        g2 = geo.arclength_resample(g.curve, 1024)
        info2 = geo.max_curvature_on_arc(g2, arc)
        assert abs(info.k_star - info2.k_star) <= geo.TOL_GEO

    def test_dense_dominance(self, ellipse_interior):
        g, arc = ellipse_interior
        info = geo.max_curvature_on_arc(g, arc)
        s = np.linspace(0.0, arc.ell, 2048)
        assert np.all(g.curvature(s) <= info.k_star + geo.TOL_GEO)

    def test_arc_coverage_precondition(self, circle_geom):
        with pytest.raises(ValueError):
            geo.max_curvature_on_arc(circle_geom, geo.RobinArc(ell=10 * circle_geom.h_s))

    def test_arc_bounds(self, circle_geom):
        with pytest.raises(ValueError):
            geo.RobinArc(ell=10.0).validate(circle_geom.L)

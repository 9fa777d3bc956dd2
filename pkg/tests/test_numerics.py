"""
Test special functions and radial quadrature
"""
import math

import mpmath
import numpy as np
import pytest
from scipy import special

from src.errors import ConvergenceError, DomainError
from src.models import FocusGeometry, GammaArgs, QuadratureSpec
from src.numerics import (
    PanelRule, bessel_j, bessel_j012, composite_gauss_legendre, integrate_radial,
    oscillation_breakpoints, scaled_gamma, scaled_incomplete_gamma, upper_incomplete_gamma,
)


def oracle_gamma(a, x):
    return float(mpmath.gammainc(a, x))


def oracle_scaled(a, x):
    return float(mpmath.exp(x) * mpmath.gammainc(a, x))


class TestIncompleteGamma:

    def test_exponential_case(self):
        assert upper_incomplete_gamma(GammaArgs(1.0, 1.0)) == pytest.approx(math.exp(-1.0),
                                                                           rel=1e-12)

    def test_complete_limit(self):
        assert upper_incomplete_gamma(GammaArgs(0.5, 0.0)) == pytest.approx(math.sqrt(math.pi),
                                                                           rel=1e-12)

    def test_negative_quarter_against_quadrature(self):
        want = float(mpmath.quad(lambda t: t ** -1.25 * mpmath.exp(-t), [0.2, 1, 10, mpmath.inf]))
        assert upper_incomplete_gamma(GammaArgs(-0.25, 0.2)) == pytest.approx(want, rel=1e-10)

    @pytest.mark.parametrize("a", [-0.25, 0.25, 0.75])
    @pytest.mark.parametrize("x", [0.01, 0.1, 1.0, 5.0, 20.0, 49.0, 60.0, 200.0, 1e4])
    def test_scaled_matches_extended_precision(self, a, x):
        assert scaled_gamma(a, x) == pytest.approx(oracle_scaled(a, x), rel=1e-10)

    @pytest.mark.parametrize("a", [-0.25, 0.25, 0.75])
    @pytest.mark.parametrize("x", [0.05, 0.7, 3.0, 30.0])
    def test_upper_matches_extended_precision(self, a, x):
        assert upper_incomplete_gamma(GammaArgs(a, x)) == pytest.approx(oracle_gamma(a, x),
                                                                       rel=1e-10)

    def test_scaled_unit_at_large_argument(self):
        assert scaled_incomplete_gamma(GammaArgs(1.0, 50.0)) == pytest.approx(1.0, rel=1e-15)

    def test_recurrence(self):
        rng = np.random.default_rng(7)
        for a, x in zip(rng.uniform(-0.9, 2.0, 200), rng.uniform(0.01, 50.0, 200)):
            lhs = a * upper_incomplete_gamma(GammaArgs(a, x)) + x ** a * math.exp(-x)
            rhs = upper_incomplete_gamma(GammaArgs(a + 1.0, x))
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_scaled_consistent_with_upper(self):
        rng = np.random.default_rng(11)
        for a, x in zip(rng.uniform(-0.9, 2.0, 100), rng.uniform(0.01, 300.0, 100)):
            scaled = scaled_incomplete_gamma(GammaArgs(a, x))
            assert scaled * math.exp(-x) == pytest.approx(
                upper_incomplete_gamma(GammaArgs(a, x)), rel=1e-9)

    @pytest.mark.parametrize("a, x", [(60.0, 55.0), (80.0, 60.0), (30.0, 51.0), (20.0, 65.0)])
    def test_large_order_near_argument(self, a, x):
        assert upper_incomplete_gamma(GammaArgs(a, x)) == pytest.approx(oracle_gamma(a, x),
                                                                       rel=1e-9)
        assert scaled_gamma(a, x) == pytest.approx(oracle_scaled(a, x), rel=1e-9)

    def test_no_overflow_at_large_argument(self):
        value = scaled_gamma(-0.25, 1e4)
        assert math.isfinite(value)
        assert value == pytest.approx(1e4 ** -1.25, rel=1e-3)

    @pytest.mark.parametrize("a", [-0.25, 0.0, -1.0])
    def test_divergent_arguments_rejected(self, a):
        with pytest.raises(DomainError):
            GammaArgs(a, 0.0)

    def test_negative_argument_rejected(self):
        with pytest.raises(DomainError):
            GammaArgs(0.5, -1.0)


class TestBessel:

    def test_values_at_origin(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(1, 0.0) == 0.0
        assert bessel_j(2, 0.0) == 0.0

    def test_first_zero_of_j0(self):
        assert abs(bessel_j(0, 2.404825557695773)) < 1e-10

    def test_unsupported_order(self):
        with pytest.raises(DomainError):
            bessel_j(3, 1.0)

    def test_negative_argument(self):
        with pytest.raises(DomainError):
            bessel_j(0, -1.0)

    def test_derivative_identity(self):
        rng = np.random.default_rng(3)
        h = 1e-5
        for x in rng.uniform(0.1, 50.0, 100):
            derivative = (bessel_j(0, x + h) - bessel_j(0, x - h)) / (2.0 * h)
            assert derivative == pytest.approx(-bessel_j(1, x), abs=1e-6)

    def test_combined_evaluation(self):
        x = np.concatenate([np.linspace(0.0, 2.0, 41), np.linspace(2.0, 1e4, 500)])
        j0, j1, j2 = bessel_j012(x)
        np.testing.assert_allclose(j0, special.jv(0, x), rtol=0, atol=1e-13)
        np.testing.assert_allclose(j1, special.jv(1, x), rtol=0, atol=1e-13)
        np.testing.assert_allclose(j2, special.jv(2, x), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("x", [0.3, 1.0, 7.5, 123.4])
    def test_second_order_extended_precision(self, x):
        assert bessel_j(2, x) == pytest.approx(float(mpmath.besselj(2, x)), abs=1e-12)


class TestQuadrature:

    SPEC = QuadratureSpec(relative_tolerance=1e-10, truncation_radius=7.0)

    @pytest.mark.parametrize("integrand, expected", [
        (lambda r: np.exp(-r * r), math.sqrt(math.pi) / 2.0),
        (lambda r: r * np.exp(-r * r), 0.5),
        (lambda r: r ** 2 * np.exp(-r * r), math.sqrt(math.pi) / 4.0),
        (lambda r: r ** 3 * np.exp(-r * r), 0.5),
        (lambda r: r ** 4 * np.exp(-r * r), 3.0 * math.sqrt(math.pi) / 8.0),
        (lambda r: r ** 5 * np.exp(-r * r), 1.0),
        (lambda r: r ** 6 * np.exp(-r * r), 15.0 * math.sqrt(math.pi) / 16.0),
        (lambda r: np.exp(-2.0 * r * r), math.sqrt(math.pi / 2.0) / 2.0),
        (lambda r: np.exp(-4.0 * r * r), math.sqrt(math.pi) / 4.0),
        (lambda r: r * np.exp(-r * r) * np.cos(3.0 * r * r), 0.5 / (1.0 + 9.0)),
        (lambda r: r * np.exp(-r * r) * np.sin(r * r), 0.25),
        (lambda r: np.exp(-r * r) * np.cos(2.0 * r), math.sqrt(math.pi) / 2.0 * math.exp(-1.0)),
        (lambda r: r * special.j0(2.0 * r) * np.exp(-r * r), 0.5 * math.exp(-1.0)),
        (lambda r: r ** 2 * special.j1(r) * np.exp(-r * r), 0.25 * math.exp(-0.25)),
        (lambda r: r ** 3 * special.jv(2, 2.0 * r) * np.exp(-r * r), 0.5 * math.exp(-1.0)),
    ])
    def test_known_integrals(self, integrand, expected):
        assert integrate_radial(integrand, self.SPEC).real == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("integrand, lower, upper, expected", [
        (lambda r: np.sin(r), 0.0, math.pi, 2.0),
        (lambda r: 1.0 / (1.0 + r * r), 0.0, 1.0, math.pi / 4.0),
        (lambda r: np.cos(r), -math.pi / 2.0, math.pi / 2.0, 2.0),
    ])
    def test_known_integrals_on_bounded_intervals(self, integrand, lower, upper, expected):
        got = integrate_radial(integrand, self.SPEC, lower=lower, upper=upper).real
        assert got == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("power, want", [
        (0, lambda a: math.sqrt(math.pi) / (2.0 * np.sqrt(a))),
        (1, lambda a: 1.0 / (2.0 * a)),
    ])
    def test_fresnel_type(self, power, want):
        a = 1.0 - 20j
        got = integrate_radial(lambda r: r ** power * np.exp(-a * r * r), self.SPEC)
        assert got == pytest.approx(want(a), rel=1e-9)

    def test_bessel_integral_against_series(self):
        spec = QuadratureSpec(relative_tolerance=1e-12)
        got = integrate_radial(lambda r: special.j0(r), spec, lower=0.0, upper=10.0).real
        want = float(mpmath.quad(lambda t: mpmath.besselj(0, t), [0, 10]))
        assert got == pytest.approx(want, rel=1e-10)

    def test_vector_integrand(self):
        b = np.array([0.5, 2.0])

        def integrand(r):
            return r * special.j0(b[:, None] * r) * np.exp(-r * r)

        got = integrate_radial(integrand, self.SPEC)
        assert got.shape == (2,)
        np.testing.assert_allclose(got.real, 0.5 * np.exp(-b * b / 4.0), rtol=1e-9)

    def test_vanishing_integrand(self):
        assert integrate_radial(lambda r: np.zeros_like(r), self.SPEC) == 0.0

    def test_phase_budget_panels(self):
        k, f = 2.0 * math.pi / 780e-9, 1e-3
        w = 0.2e-3
        spec = QuadratureSpec(relative_tolerance=1e-10, truncation_radius=5.3 * w)

        def integrand(r):
            return r * np.exp(-(r / w) ** 2) * np.exp(-1j * k * r * r / (2.0 * f))

        got = integrate_radial(integrand, spec, budget=lambda r: r * r / (2.0 * f),
                               step=780e-9 / 4.0)
        a = 1.0 / w ** 2 + 1j * k / (2.0 * f)
        assert got == pytest.approx(1.0 / (2.0 * a), rel=1e-8)

    def test_non_convergence_carries_estimate(self):
        spec = QuadratureSpec(relative_tolerance=1e-12, max_subdivisions=2, initial_panels=1)
        with pytest.raises(ConvergenceError) as info:
            integrate_radial(lambda r: np.sin(1000.0 * r) * np.exp(r), spec, lower=0.0,
                             upper=10.0)
        assert info.value.estimate is not None
        assert info.value.error_bound > 0.0

    def test_empty_interval(self):
        with pytest.raises(DomainError):
            integrate_radial(lambda r: r, self.SPEC, lower=1.0, upper=1.0)

    def test_budget_needs_step(self):
        with pytest.raises(DomainError):
            integrate_radial(lambda r: r, self.SPEC, budget=lambda r: r)


class TestPanels:

    def test_composite_rule_is_exact_for_polynomials(self):
        nodes, weights = composite_gauss_legendre(np.array([0.0, 0.5, 2.0, 3.0]), order=8)
        assert weights.sum() == pytest.approx(3.0, rel=1e-14)
        assert np.sum(weights * nodes ** 15) == pytest.approx(3.0 ** 16 / 16.0, rel=1e-12)

    def test_breakpoints_follow_budget(self):
        edges = oscillation_breakpoints(lambda r: 2.0 * r, 0.0, 1.0, 0.25)
        np.testing.assert_allclose(edges, np.linspace(0.0, 1.0, 9), atol=1e-12)

    def test_single_panel_when_budget_is_small(self):
        edges = oscillation_breakpoints(lambda r: r, 0.0, 1.0, 10.0)
        np.testing.assert_array_equal(edges, [0.0, 1.0])

    def test_panel_rule_integrates_on_fixed_panels(self):
        rule = PanelRule.from_edges(np.linspace(0.0, math.pi, 5))
        estimate = rule.integrate(lambda sl: np.sin(rule.nodes[sl]),
                                  lambda sl: np.sin(rule.check_nodes[sl]))
        assert estimate.value == pytest.approx(2.0, rel=1e-13)
        assert estimate.error < 1e-8
        assert estimate.absolute == pytest.approx(2.0, rel=1e-13)
        assert rule.panel_count == 4
        assert rule.nodes.size == 32 and rule.check_nodes.size == 24

    def test_panel_rule_flags_unresolved_oscillation(self):
        rule = PanelRule.from_edges(np.array([0.0, 1.0]))
        estimate = rule.integrate(lambda sl: np.cos(60.0 * rule.nodes[sl]),
                                  lambda sl: np.cos(60.0 * rule.check_nodes[sl]))
        assert estimate.error > 1e-4


class TestQuadratureSpec:

    @pytest.mark.parametrize("tolerance", [0.0, -1e-9, 1e-2])
    def test_tolerance_range(self, tolerance):
        with pytest.raises(DomainError):
            QuadratureSpec(relative_tolerance=tolerance)

    def test_truncation_covers_envelope(self):
        geom = FocusGeometry(w_l=1e-3, f=4.5e-3, wavelength=780e-9)
        spec = QuadratureSpec.for_geometry(geom)
        assert spec.truncation_radius == pytest.approx(5.3e-3)
        assert spec.covers_envelope(geom.w_l)
        assert math.exp(-(spec.truncation_radius / geom.w_l) ** 2) < 1e-12

    def test_truncation_stops_at_aperture(self):
        geom = FocusGeometry(w_l=1e-3, f=4.5e-3, wavelength=780e-9, v=0.4)
        assert QuadratureSpec.for_geometry(geom).truncation_radius == pytest.approx(1.8e-3)

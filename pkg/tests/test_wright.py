import math

import mpmath
import numpy as np
import pytest
from scipy import special

from stable_area import wright
from stable_area.errors import InvalidInput, NonConvergence
from stable_area.models import EvalConfig
from stable_area.results import Route


def phi_at_zero(alpha):
    a = 1.0 + alpha
    return a ** (-alpha / a) * math.gamma(1.0 / a) * math.sin(math.pi / a) / math.pi


def psi_at_zero(alpha):
    a = 1.0 + alpha
    return a ** (-alpha / a) * math.gamma(1.0 / a) * math.cos(math.pi / a) / math.pi


class TestAiryCase:
    """At alpha = 2, Phi is Ai and Psi is Scorer's Gi."""

    def test_values_at_zero(self):
        assert wright.phi(2, 0).value == pytest.approx(0.35502805388781722, abs=1e-15)
        assert wright.phi_prime(2, 0).value == pytest.approx(-0.25881940379280680, abs=1e-15)
        assert wright.psi(2, 0).value == pytest.approx(special.airy(0.0)[2] / 3.0, abs=1e-15)
        assert wright.psi_prime(2, 0).value == pytest.approx(special.airy(0.0)[3] / 3.0, abs=1e-15)

    @pytest.mark.parametrize("x", [-3.0, -1.0, 0.5, 2.0, 5.0])
    def test_phi_matches_airy(self, airy, x):
        ai, aip, _, _ = airy(x)
        assert wright.phi(2, x).value == pytest.approx(ai, abs=1e-12)
        assert wright.phi_prime(2, x).value == pytest.approx(aip, abs=1e-12)

    def test_far_right_uses_expansion(self, airy):
        result = wright.phi(2, 10.0)
        assert result.route is Route.ASYMPTOTIC
        assert result.value == pytest.approx(airy(10.0)[0], rel=1e-10)

    def test_airy_reference(self, airy):
        for x in (-2.0, 0.0, 1.0, 3.0):
            assert wright.airy_reference(x) == pytest.approx(airy(x)[0], abs=1e-12)
        assert wright.airy_prime_reference(1.0) == pytest.approx(airy(1.0)[1], abs=1e-12)

    def test_truncated_expansions(self, airy):
        assert wright.phi_asymptotic(2, 10.0, 5) == pytest.approx(airy(10.0)[0], rel=1e-6)
        assert wright.phi_prime_asymptotic(2, 10.0, 5) == pytest.approx(airy(10.0)[1], rel=1e-6)
        series = wright.psi(2, 10.0, route="series").value
        assert wright.psi_asymptotic(2, 10.0, 6) == pytest.approx(series, rel=1e-7)

    def test_wronskian_decays_with_integral_of_ai(self):
        for x in (0.0, 1.0, 2.0):
            w = math.pi * (wright.psi_prime(2, x).value * wright.phi(2, x).value
                           - wright.phi_prime(2, x).value * wright.psi(2, x).value)
            tail = float(mpmath.quad(mpmath.airyai, [x, mpmath.inf]))
            assert w == pytest.approx(tail, abs=1e-10)

    @pytest.mark.slow
    def test_grid_against_line_integral(self):
        for x in np.linspace(0.0, 5.0, 101):
            assert wright.phi(2, x).value == pytest.approx(wright.airy_reference(x), abs=1e-10)

    def test_first_zero_is_airy_zero(self):
        assert wright.first_zero(2) == pytest.approx(special.ai_zeros(1)[0][0], abs=1e-10)


class TestGeneralAlpha:
    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
    def test_values_at_zero(self, alpha):
        assert wright.phi(alpha, 0).value == pytest.approx(phi_at_zero(alpha), rel=1e-13)
        assert wright.psi(alpha, 0).value == pytest.approx(psi_at_zero(alpha), rel=1e-13)

    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
    @pytest.mark.parametrize("x", [-2.0, 0.0, 1.0, 3.0])
    def test_series_agrees_with_quadrature(self, alpha, x):
        for fn in (wright.phi, wright.phi_prime, wright.psi, wright.psi_prime):
            series = fn(alpha, x, route="series")
            quad = fn(alpha, x, route="quadrature")
            assert series.route is Route.SERIES
            assert quad.route is Route.QUADRATURE
            assert series.value == pytest.approx(quad.value, abs=1e-9)

    @pytest.mark.parametrize("x", [0.0, 1.0, 2.0])
    def test_real_axis_integral(self, x):
        assert wright.phi(1.5, x).value == pytest.approx(wright.phi_integral_reference(1.5, x), abs=1e-9)
        assert wright.phi_prime(1.5, x).value == pytest.approx(
            wright.phi_integral_reference(1.5, x, derivative=True), abs=1e-9)

    def test_real_axis_integral_rejects_two(self):
        with pytest.raises(InvalidInput):
            wright.phi_integral_reference(2.0, 0.0)

    def test_tail_decay(self):
        alpha = 1.5
        a = 1.0 + alpha
        for x in (5.0, 10.0, 15.0):
            value = wright.phi(alpha, x).value
            assert value > 0
            reduced = (math.log(value) + (alpha / a) * x ** (a / alpha)
                       - (1.0 - alpha) / (2.0 * alpha) * math.log(x))
            assert reduced == pytest.approx(-0.5 * math.log(2.0 * math.pi * alpha), abs=0.1)

    def test_route_selection(self):
        assert wright.phi(1.5, 0.5).route is Route.SERIES
        far = wright.phi(1.5, 20.0)
        assert far.route is Route.ASYMPTOTIC
        assert far.abs_error_estimate <= 1e-12 * abs(far.value) + 1e-14

    def test_expansion_matches_series_where_both_work(self):
        series = wright.phi(1.5, 8.0, route="series").value
        expansion = wright.phi(1.5, 8.0, route="asymptotic").value
        assert expansion == pytest.approx(series, rel=1e-6)

    def test_complex_argument_on_real_axis(self, airy):
        result = wright.phi(2, complex(1.0, 0.0))
        assert isinstance(result.value, complex)
        assert result.value.real == pytest.approx(airy(1.0)[0], abs=1e-13)
        assert abs(result.value.imag) < 1e-13

    def test_error_estimates_bound_the_difference(self):
        series = wright.psi(1.5, 1.0, route="series")
        quad = wright.psi(1.5, 1.0, route="quadrature")
        assert series.agrees_with(quad, slack=1e-10)

    @pytest.mark.parametrize("alpha", [1.5, 1.8])
    def test_first_zero(self, alpha):
        z = wright.first_zero(alpha)
        assert z < 0
        assert wright.phi(alpha, z).value == pytest.approx(0.0, abs=1e-10)
        assert wright.phi(alpha, 0.9 * z).value > 0

    def test_real_and_complex_calls_stay_apart(self):
        real = wright.phi(2, 1.0)
        on_axis = wright.phi(2, complex(1.0, 0.0))
        assert isinstance(real.value, float)
        assert isinstance(on_axis.value, complex)
        first = wright.phi(1.7, complex(0.5, 0.0))
        second = wright.phi(1.7, 0.5)
        assert isinstance(first.value, complex)
        assert isinstance(second.value, float)
        assert second.value == pytest.approx(first.value.real, abs=1e-13)


class TestCaches:
    def test_no_coefficient_store_when_disabled(self, monkeypatch):
        monkeypatch.setattr(wright, "CACHE_ENABLED", False)
        monkeypatch.setattr(wright._coef_cache, "tables", {}, raising=False)
        values, _ = wright.series_all(1.37, 0.5)
        assert float(values[0]) > 0
        assert wright._coef_cache.tables == {}

    def test_coefficient_store_is_bounded(self, monkeypatch):
        monkeypatch.setattr(wright, "CACHE_ENABLED", True)
        monkeypatch.setattr(wright._coef_cache, "tables", {}, raising=False)
        for k in range(wright._MAX_COEF_LISTS + 5):
            wright.series_all(1.2 + k / 1000.0, 0.5)
        assert len(wright._coef_cache.tables) <= wright._MAX_COEF_LISTS


class TestF:
    """F_alpha and its rotation identity with Psi + i Phi."""

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_identity(self, lam):
        assert wright.f_identity_residual(1.5, lam) < 1e-9

    def test_routes_agree(self):
        series = wright.f_alpha(1.5, 1.0, route="series").value
        quad = wright.f_alpha(1.5, 1.0, route="quadrature").value
        assert abs(series - quad) < 1e-8

    def test_brownian_is_real(self):
        # F_2(lambda) = int exp(-lambda t - t^3/3) dt
        value = wright.f_alpha(2, 1.0).value
        assert abs(value.imag) < 1e-12
        assert 0 < value.real < 1

    def test_no_asymptotic_route(self):
        with pytest.raises(InvalidInput):
            wright.f_alpha(1.5, 1.0, route="asymptotic")

    def test_rotation_is_unit(self):
        assert abs(wright.rotation(1.5)) == pytest.approx(1.0)


class TestInputs:
    def test_bad_alpha(self):
        with pytest.raises(InvalidInput):
            wright.phi(1.0, 0.0)

    @pytest.mark.parametrize("x", [float("nan"), float("inf"), "abc"])
    def test_bad_x(self, x):
        with pytest.raises(InvalidInput):
            wright.phi(1.5, x)

    def test_asymptotic_needs_positive_x(self):
        with pytest.raises(InvalidInput):
            wright.phi(1.5, -1.0, route="asymptotic")

    def test_complex_only_on_series(self):
        with pytest.raises(InvalidInput):
            wright.phi(1.5, complex(1.0, 1.0), route="quadrature")

    def test_term_budget(self):
        with pytest.raises(NonConvergence):
            wright.phi(1.5, 30.0, EvalConfig(max_series_terms=10), route="series")

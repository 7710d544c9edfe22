import math
from collections import OrderedDict
from fractions import Fraction

import numpy as np
import pytest

from stable_area import coeffs, simulate
from stable_area.errors import InvalidInput


class TestBellTable:
    """The partial Bell table B[n][k] behind the asymptotic coefficients."""

    def test_diagonal_is_power_of_six(self):
        for n in range(1, 9):
            assert coeffs.bell_B(Fraction(3, 2), n, n, exact=True) == Fraction(1, 6 ** n)

    def test_first_column(self):
        # B[n][1] = (2 - alpha)_{n-1} / ((n+1)(n+2))
        a = Fraction(3, 2)
        assert coeffs.bell_B(a, 1, 1, exact=True) == Fraction(1, 6)
        assert coeffs.bell_B(a, 2, 1, exact=True) == Fraction(1, 24)
        assert coeffs.bell_B(a, 2, 2, exact=True) == Fraction(1, 36)

    def test_column_vanishes_off_diagonal_at_two(self):
        assert coeffs.bell_B(2, 3, 1, exact=True) == 0

    def test_float_matches_exact(self):
        for n in range(1, 7):
            for k in range(1, n + 1):
                exact = coeffs.bell_B("1.5", n, k, exact=True)
                assert coeffs.bell_B(1.5, n, k) == pytest.approx(float(exact), rel=1e-14)

    def test_bound(self):
        assert coeffs.bell_bound_violations(1.5, 12) == []
        assert coeffs.bell_bound_violations(1.1, 10) == []

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
    def test_bound_to_forty(self, alpha):
        assert coeffs.bell_bound_violations(alpha, 40) == []

    @pytest.mark.parametrize("n,k", [(3, 4), (0, 1), (2, 0)])
    def test_bad_indices(self, n, k):
        with pytest.raises(InvalidInput):
            coeffs.bell_B(1.5, n, k)


class TestAsymptoticCoefficients:
    """c_p and d_p of the expansion of Phi at +infinity."""

    def test_brownian_values(self):
        assert coeffs.c_p(2, 1, exact=True) == Fraction(5, 48)
        assert coeffs.c_p(2, 2, exact=True) == Fraction(385, 4608)
        assert coeffs.d_p(2, 1, exact=True) == Fraction(-7, 48)

    def test_brownian_closed_form(self):
        for n in range(0, 7):
            assert coeffs.c_p(2, n, exact=True) == coeffs.closed_form_c_brownian(n)

    def test_first_coefficient(self):
        # c_1 = (alpha - 1)(2 alpha + 1) / (24 alpha)
        assert coeffs.c_p(Fraction(3, 2), 1, exact=True) == Fraction(1, 18)
        for a in (1.2, 1.5, 1.8):
            assert coeffs.c_p(a, 1) == pytest.approx((a - 1) * (2 * a + 1) / (24 * a), rel=1e-14)

    def test_zeroth(self):
        assert coeffs.c_p(1.7, 0) == 1.0
        assert coeffs.d_p(1.7, 0) == 1.0

    def test_continuous_in_alpha(self):
        for p in range(1, 4):
            assert coeffs.c_p(1.999, p) == pytest.approx(coeffs.c_p(2.0, p), rel=1e-2)

    def test_lower_bound(self):
        for n in range(1, 8):
            assert coeffs.c_lower_bound(1.5, n) <= coeffs.c_p(1.5, n)

    def test_growth(self):
        ratios = coeffs.growth_check_c(1.5, 12)
        assert ratios.shape == (12,)
        assert np.all(np.isfinite(ratios)) and np.all(ratios > 0)
        assert ratios[-1] < 10 * ratios[4]

    def test_negative_index(self):
        with pytest.raises(InvalidInput):
            coeffs.c_p(1.5, -1)

    def test_growth_needs_five(self):
        with pytest.raises(InvalidInput):
            coeffs.growth_check_c(1.5, 3)

    @pytest.mark.parametrize("alpha", [1.5, 2.0])
    def test_growth_band(self, alpha):
        ratios = coeffs.growth_check_c(alpha, 30)[9:]
        assert ratios.max() / ratios.min() <= 10


class TestMoments:
    """Positive and negative moments of the excursion area."""

    def test_first_omega(self):
        assert coeffs.omega_n(Fraction(3, 2), 1, exact=True) == Fraction(1, 6)

    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8, 2.0])
    def test_recurrence_matches_closed_forms(self, alpha):
        first, second = coeffs.moment_closed_forms(alpha)
        assert coeffs.moment_ex(alpha, 1) == pytest.approx(first, rel=1e-12)
        assert coeffs.moment_ex(alpha, 2) == pytest.approx(second, rel=1e-12)

    def test_brownian_moments(self):
        assert coeffs.moment_ex(2, 1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
        assert coeffs.moment_ex(2, 2) == pytest.approx(5.0 / 6.0, rel=1e-12)

    @pytest.mark.parametrize("alpha", np.linspace(1.1, 2.0, 10))
    def test_closed_forms_on_grid(self, alpha):
        first, second = coeffs.moment_closed_forms(alpha)
        assert coeffs.moment_ex(alpha, 1) == pytest.approx(first, rel=1e-12)
        assert coeffs.moment_ex(alpha, 2) == pytest.approx(second, rel=1e-12)

    @pytest.mark.parametrize("alpha", [1.5, 2.0])
    def test_moment_growth_band(self, alpha):
        for n in range(5, 31):
            scaled = coeffs.moment_ex(alpha, n) ** (1.0 / n) / n ** (1.0 - 1.0 / alpha)
            assert 0.1 <= scaled <= 10.0

    @pytest.mark.slow
    def test_first_negative_moment_against_simulation(self):
        alpha = 1.5
        power = (1.0 - alpha) / (alpha + 1.0)
        fine = simulate.mc_moment(simulate.sample_areas("excursion", alpha, 4000, 800, seed=29), power, 29)
        coarse = simulate.mc_moment(simulate.sample_areas("excursion", alpha, 4000, 200, seed=29), power, 29)
        extrapolated = simulate.richardson(fine, coarse, 4.0, alpha)
        assert extrapolated.mean == pytest.approx(coeffs.neg_moment_ex(alpha, 1), rel=0.03)

    def test_moments_increase_log_convexly(self):
        m = [coeffs.moment_ex(1.5, n) for n in range(1, 6)]
        assert all(x > 0 for x in m)
        for n in range(1, 4):
            assert m[n] ** 2 <= m[n - 1] * m[n + 1] * (1 + 1e-12)

    def test_first_negative_moment(self):
        # E[A_ex^(-1/3)] for alpha = 2
        assert coeffs.neg_moment_ex(2, 1) == pytest.approx(1.054877, rel=1e-5)

    def test_negative_moments_positive(self):
        for n in range(1, 5):
            assert coeffs.neg_moment_ex(1.5, n) > 0

    def test_delta_has_no_exact_mode(self):
        table = coeffs.coefficient_table(Fraction(3, 2), exact=True)
        with pytest.raises(InvalidInput):
            table.delta_n(1)


class TestAlphaRange:
    @pytest.mark.parametrize("alpha", [1.0, 0.5, 2.5, float("nan")])
    def test_rejects(self, alpha):
        with pytest.raises(InvalidInput):
            coeffs.c_p(alpha, 1)

    def test_invalid_input_is_value_error(self):
        with pytest.raises(ValueError):
            coeffs.omega_n(3.0, 1)


class TestTableCache:
    def test_least_recently_used_table_is_dropped(self, monkeypatch):
        monkeypatch.setattr(coeffs, "CACHE_ENABLED", True)
        monkeypatch.setattr(coeffs, "MAX_TABLES", 2)
        monkeypatch.setattr(coeffs, "_TABLES", OrderedDict())
        first = coeffs.coefficient_table(1.31)
        coeffs.coefficient_table(1.32)
        assert coeffs.coefficient_table(1.31) is first
        coeffs.coefficient_table(1.33)
        assert len(coeffs._TABLES) == 2
        assert coeffs.coefficient_table(1.31) is first
        assert (float(1.32).hex(), 53) not in coeffs._TABLES

    def test_no_store_when_disabled(self, monkeypatch):
        monkeypatch.setattr(coeffs, "CACHE_ENABLED", False)
        monkeypatch.setattr(coeffs, "_TABLES", OrderedDict())
        coeffs.coefficient_table(1.34)
        assert len(coeffs._TABLES) == 0

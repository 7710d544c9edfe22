import math

import numpy as np
import pytest
from scipy import stats

from stable_area import inversion, simulate, transforms
from stable_area.errors import DegenerateWeights, HorizonExceeded, InsufficientTail, InvalidInput
from stable_area.results import MCEstimate


class TestIncrements:
    """Chambers-Mallows-Stuck draws with E[exp(-q L_1)] = exp(q^alpha)."""

    def test_brownian_variance(self, rng):
        x = simulate.standard_variates(2.0, 200_000, rng)
        assert x.mean() == pytest.approx(0.0, abs=0.02)
        assert x.var() == pytest.approx(2.0, rel=0.03)

    @pytest.mark.parametrize("q", [0.5, 1.0])
    def test_laplace_transform(self, rng, q):
        x = simulate.standard_variates(1.5, 200_000, rng)
        estimate = simulate.laplace_of_samples(x, q)
        assert abs(estimate.z_score(math.exp(q ** 1.5))) < 4.0

    def test_scaling(self, rng):
        dt = 0.01
        small = simulate.stable_increments(1.5, dt, 5000, rng)
        unit = dt ** (1.0 / 1.5) * simulate.standard_variates(1.5, 5000, rng)
        assert stats.ks_2samp(small, unit).pvalue > 1e-3

    def test_no_downward_jumps(self, rng):
        x = simulate.standard_variates(1.5, 100_000, rng)
        low, high = np.quantile(x, [1e-4, 1.0 - 1e-4])
        assert abs(low) < high / 3.0

    def test_single_increment(self):
        assert isinstance(simulate.stable_increment(1.5, 0.01, np.random.default_rng(1)), float)
        with pytest.raises(InvalidInput):
            simulate.stable_increment(1.5, 0.0)


class TestDeterminism:
    def test_seed_and_threads(self):
        one = simulate.sample_areas("meander", 1.5, 1200, 100, seed=7, threads=1)
        again = simulate.sample_areas("meander", 1.5, 1200, 100, seed=7, threads=1)
        two = simulate.sample_areas("meander", 1.5, 1200, 100, seed=7, threads=2)
        np.testing.assert_array_equal(one, again)
        np.testing.assert_array_equal(one, two)

    def test_different_seeds(self):
        a = simulate.path_areas(1.5, 600, 50, seed=1)
        b = simulate.path_areas(1.5, 600, 50, seed=2)
        assert not np.array_equal(a, b)


class TestAreaIdentity:
    def test_brownian(self):
        (q, path, direct), = simulate.area_identity_check(2.0, 20_000, (1.0,), 200, seed=3)
        assert q == 1.0
        # int_0^1 L has the law of 3^(-1/2) L_1, so E[exp(-A)] = exp(1/3)
        assert abs(path.z_score(math.exp(1.0 / 3.0))) < 4.0
        assert abs(direct.z_score(math.exp(1.0 / 3.0))) < 4.0

    def test_needs_enough_paths(self):
        with pytest.raises(InvalidInput):
            simulate.area_identity_check(1.5, 100)


class TestFirstPassage:
    def test_close_start(self):
        estimate = simulate.first_passage_functional(1.5, 0.01, 0.0, 1.0, 2000, dt=1e-3, seed=5)
        assert estimate.mean == pytest.approx(transforms.joint_laplace_T0_area(1.5, 0.01, 0.0, 1.0), abs=0.02)
        assert estimate.tail_bound <= simulate.HORIZON_TOLERANCE

    def test_horizon(self):
        with pytest.raises(HorizonExceeded):
            simulate.first_passage_functional(1.5, 5.0, 0.0, 0.0, 200, dt=1e-3, seed=5, horizon=0.01)

    def test_samples(self):
        area, hit_time, absorbed, faded = simulate.passage_samples(1.5, 1.0, 300, dt=1e-2, seed=5)
        assert area.shape == hit_time.shape == absorbed.shape == faded.shape == (300,)
        assert np.all(area[absorbed] > 0)
        assert not faded.any()

    def test_bad_start(self):
        with pytest.raises(InvalidInput):
            simulate.passage_samples(1.5, 0.0, 10)

    @pytest.mark.slow
    def test_matches_closed_form(self):
        alpha = 1.5
        target = transforms.joint_laplace_T0_area(alpha, 1.0, 0.0, 1.0)
        fine = simulate.first_passage_functional(alpha, 1.0, 0.0, 1.0, 20_000, dt=1e-3, seed=11)
        coarse = simulate.first_passage_functional(alpha, 1.0, 0.0, 1.0, 20_000, dt=4e-3, seed=11)
        extrapolated = simulate.richardson(fine, coarse, 4.0, alpha)
        assert abs(extrapolated.z_score(target)) < 4.0

    @pytest.mark.slow
    def test_mellin_moment(self):
        # a negative power is insensitive to the areas of paths cut at the horizon
        estimate = simulate.mc_mellin_passage(1.5, 1.0, -0.5, 5000, dt=1e-3, seed=13)
        assert estimate.mean == pytest.approx(transforms.mellin_area_T0(1.5, -0.5), rel=0.05)


class TestExcursionAndMeander:
    def test_excursion_path(self):
        path = simulate.sample_excursion(1.5, 200, rng=np.random.default_rng(4))
        assert path.values.shape == (201,)
        assert path.values[0] == 0.0 and path.values[-1] == 0.0
        assert np.all(path.values[1:-1] > 0)
        assert path.area > 0
        assert path.dt == pytest.approx(1.0 / 200)

    def test_meander_path(self):
        path = simulate.sample_meander(1.5, 200, rng=np.random.default_rng(4))
        assert path.values[0] == 0.0
        assert np.all(path.values[1:] > 0)
        assert path.area == pytest.approx(path.values[:-1].sum() / 200)

    def test_brownian_excursion_mean(self):
        areas = simulate.sample_areas("excursion", 2.0, 1000, 200, seed=9)
        # the discrete minimum sits above the true one, so the area is biased low by O(dt^(1/2))
        assert np.mean(areas) == pytest.approx(transforms.mean_ex(2.0), rel=0.1)

    def test_brownian_meander_mean(self):
        areas = simulate.sample_areas("meander", 2.0, 1000, 400, seed=9)
        assert np.mean(areas) == pytest.approx(transforms.mean_meander(2.0), rel=0.1)

    @pytest.mark.slow
    def test_excursion_mean_extrapolated(self):
        alpha = 1.5
        fine = simulate.mc_moment(simulate.sample_areas("excursion", alpha, 4000, 800, seed=21), 1.0, 21)
        coarse = simulate.mc_moment(simulate.sample_areas("excursion", alpha, 4000, 200, seed=21), 1.0, 21)
        extrapolated = simulate.richardson(fine, coarse, 4.0, alpha)
        assert extrapolated.mean == pytest.approx(transforms.mean_ex(alpha), rel=0.05)

    def test_unknown_target(self):
        with pytest.raises(InvalidInput):
            simulate.sample_areas("bridge", 1.5, 10, 100)


class TestConditioned:
    def test_normalization(self):
        estimate = simulate.sample_conditioned_weighted(1.5, 0.01, 200, n_samples=4000, seed=17)
        assert estimate.mean == pytest.approx(1.0)
        assert estimate.n == 4000
        assert estimate.extra["systems"] == math.ceil(4000 / simulate.RESAMPLE_BLOCK)
        assert estimate.extra["normalization"] > 0
        assert estimate.extra["ess"] >= simulate.MIN_ESS

    def test_free_path_weights(self):
        areas, weights = simulate.conditioned_samples(1.5, 0.01, 2000, 200, seed=17)
        assert areas.shape == weights.shape == (2000,)
        assert np.all(weights >= 0)
        assert np.all(areas[weights > 0] > 0)

    def test_resampled_weights(self):
        areas, weights = simulate.resampled_samples(1.5, 0.01, 1000, 200, seed=17)
        assert areas.shape == weights.shape == (1000,)
        assert np.all(weights >= 0)
        assert np.all(areas[weights > 0] > 0)
        assert simulate.effective_sample_size(weights) > 100

    def test_raw_mean_is_normalization(self):
        raw = simulate.sample_conditioned_weighted(1.5, 0.01, 200, n_samples=4000, seed=17, self_normalize=False)
        assert raw.mean == pytest.approx(raw.extra["normalization"])
        assert raw.stderr == pytest.approx(raw.extra["normalization_stderr"])

    def test_laplace_between_zero_and_one(self):
        estimate = simulate.sample_conditioned_weighted(1.5, 0.01, 200, lambda a: np.exp(-a),
                                                        n_samples=4000, seed=17)
        assert 0.0 < estimate.mean < 1.0
        assert estimate.stderr > 0

    def test_area_map_sees_area_arrays(self):
        seen = []

        def record(areas):
            seen.append(areas.ndim)
            return areas

        simulate.sample_conditioned_weighted(1.5, 0.01, 100, record, n_samples=1000, seed=17)
        assert seen == [1] * math.ceil(1000 / simulate.RESAMPLE_BLOCK)

    def test_seeded_runs_repeat(self):
        one = simulate.sample_conditioned_weighted(1.5, 0.01, 100, lambda a: np.exp(-a), n_samples=2000,
                                                   seed=3, threads=1)
        two = simulate.sample_conditioned_weighted(1.5, 0.01, 100, lambda a: np.exp(-a), n_samples=2000,
                                                   seed=3, threads=2)
        assert one.mean == two.mean

    def test_degenerate(self):
        # the effective sample size never exceeds the number of walks
        with pytest.raises(DegenerateWeights):
            simulate.sample_conditioned_weighted(1.5, 0.01, 100, n_samples=50, seed=1)

    def test_bad_start(self):
        with pytest.raises(InvalidInput):
            simulate.resampled_samples(1.5, 0.0, 100)

    def test_systematic_resample(self, rng):
        picks = simulate._systematic_resample(np.array([0.0, 0.25, 0.75]), rng)
        assert picks.shape == (3,)
        assert 0 not in picks
        assert np.count_nonzero(picks == 2) >= 2

    def test_effective_sample_size(self):
        assert simulate.effective_sample_size(np.ones(10)) == pytest.approx(10.0)
        assert simulate.effective_sample_size(np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [1.5, 2.0])
    def test_matches_inversion(self, alpha):
        target = inversion.invert_conditioned(alpha, 1.0)

        def run(steps):
            return simulate.sample_conditioned_weighted(alpha, 0.01, steps, lambda a: np.exp(-a),
                                                        n_samples=8000, seed=31)

        extrapolated = simulate.richardson(run(800), run(200), 4.0, alpha)
        assert abs(extrapolated.z_score(target)) < 4.0


class TestEstimators:
    def test_richardson(self):
        fine = MCEstimate(mean=1.0, stderr=0.1, n=100, seed=0)
        coarse = MCEstimate(mean=1.2, stderr=0.1, n=100, seed=0)
        combined = simulate.richardson(fine, coarse, 4.0, 2.0)
        assert combined.mean == pytest.approx(0.8)
        assert combined.stderr == pytest.approx(math.hypot(0.2, 0.1))
        with pytest.raises(InvalidInput):
            simulate.richardson(fine, coarse, 1.0, 2.0)

    def test_laplace_of_zero(self):
        assert simulate.laplace_of_samples([0.0, 0.0], 3.0).mean == 1.0

    def test_weighted_mean(self):
        estimate = simulate.weighted_mean([1.0, 3.0], [3.0, 1.0])
        assert estimate.mean == pytest.approx(1.5)
        with pytest.raises(DegenerateWeights):
            simulate.weighted_mean([1.0, 2.0], [0.0, 0.0])

    def test_negative_moment_needs_positive_samples(self):
        with pytest.raises(InvalidInput):
            simulate.mc_moment([0.0, 1.0], -0.5)
        assert simulate.mc_moment([4.0, 4.0], -0.5).mean == pytest.approx(0.5)

    def test_pareto_tail_slope(self, rng):
        x = rng.pareto(0.5, 100_000) + 1.0
        assert simulate.weighted_tail_slope(x) == pytest.approx(-0.5, abs=0.05)

    def test_weibull_tail_slope(self, rng):
        x = rng.weibull(3.0, 200_000)
        assert simulate.excursion_tail_slope(1.5, x) == pytest.approx(3.0, abs=0.2)

    def test_insufficient_tail(self, rng):
        with pytest.raises(InsufficientTail):
            simulate.weighted_tail_slope(rng.random(500))
        with pytest.raises(InsufficientTail):
            simulate.excursion_tail_slope(1.5, rng.random(5000))

    @pytest.mark.slow
    def test_meander_tail(self):
        areas = simulate.sample_areas("meander", 1.5, 20_000, 200, seed=23)
        slope = simulate.meander_tail_slope(areas)
        assert -3.0 < slope < -0.75

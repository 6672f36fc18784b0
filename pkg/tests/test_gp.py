"""Gaussian-process surrogate and UCB acquisition tests."""

import math

import numpy as np
import pytest

from gtlcirl.gp import (
    GpError,
    GpModel,
    UcbSchedule,
    candidate_set,
    gp_posterior,
    propose_theta,
    rbf_kernel,
    recommend_theta,
    update_model,
)

from oracles import gp_posterior_direct


class TestKernel:
    def test_zero_distance(self):
        assert rbf_kernel(np.array([1.0, 2.0]), np.array([1.0, 2.0]), 1.0) == 1.0

    def test_sqrt_two_distance_unit_scale(self):
        value = rbf_kernel(np.array([0.0, 0.0]), np.array([1.0, 1.0]), 1.0)
        assert value == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(size=3)
            y = rng.normal(size=3)
            assert rbf_kernel(x, y, 0.7) == rbf_kernel(y, x, 0.7)

    def test_dimension_mismatch(self):
        with pytest.raises(GpError):
            rbf_kernel(np.zeros(2), np.zeros(3), 1.0)

    def test_nonpositive_length_scale(self):
        with pytest.raises(GpError):
            rbf_kernel(np.zeros(2), np.zeros(2), 0.0)

    def test_gram_matrices_positive_semidefinite(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            points = rng.uniform(0, 1, size=(int(rng.integers(2, 21)), 2))
            gram = np.array(
                [[rbf_kernel(a, b, 0.3) for b in points] for a in points]
            )
            assert np.allclose(gram, gram.T)
            assert np.linalg.eigvalsh(gram).min() >= -1e-8


class TestPosterior:
    def test_prior_with_no_observations(self):
        model = GpModel()
        assert gp_posterior(model, np.array([0.3])) == (0.0, 1.0)

    def test_noise_free_interpolation(self):
        model = GpModel(noise_variance=0.0)
        rng = np.random.default_rng(2)
        xs = rng.uniform(0, 1, size=(6, 1))
        ys = np.sin(3 * xs[:, 0])
        for x, y in zip(xs, ys):
            model.add(x, float(y))
        for x, y in zip(xs, ys):
            mean, variance = model.posterior(x)
            assert mean == pytest.approx(y, abs=1e-9)
            assert variance == pytest.approx(0.0, abs=1e-6)

    def test_far_field_reverts_to_prior(self):
        model = GpModel(length_scale=0.05)
        model.add(np.array([0.0]), 0.7)
        mean, variance = model.posterior(np.array([50.0]))
        assert mean == pytest.approx(0.0, abs=1e-9)
        assert variance == pytest.approx(1.0, abs=1e-9)

    def test_matches_direct_inverse_solution(self):
        rng = np.random.default_rng(3)
        model = GpModel(length_scale=0.4, noise_variance=1e-3)
        xs = rng.uniform(0, 1, size=(5, 1))
        ys = [float(-(x[0] - 0.5) ** 2) for x in xs]
        for x, y in zip(xs, ys):
            model.add(x, y)
        for query in rng.uniform(0, 1, size=(10, 1)):
            mean, variance = model.posterior(query)
            ref_mean, ref_var = gp_posterior_direct(xs, ys, query, 0.4, 1e-3)
            assert mean == pytest.approx(ref_mean, abs=1e-8)
            assert variance == pytest.approx(max(ref_var, 0.0), abs=1e-8)

    def test_two_point_closed_form(self):
        """Posterior from two observations against the hand-solved 2x2
        system (duplicate inputs, different targets, noisy model)."""
        length_scale, noise = 0.5, 0.1
        x = 0.3
        y1, y2 = 1.0, 2.0
        model = GpModel(length_scale=length_scale, noise_variance=noise)
        model.add(np.array([x]), y1)
        model.add(np.array([x]), y2)
        # K = [[1, 1], [1, 1]] + noise I; k* = [1, 1]
        # mean = k* K^-1 y = (y1 + y2) / (2 + noise)
        expected_mean = (y1 + y2) / (2 + noise)
        expected_var = 1.0 - 2.0 / (2 + noise)
        mean, variance = model.posterior(np.array([x]))
        assert mean == pytest.approx(expected_mean, abs=1e-8)
        assert variance == pytest.approx(expected_var, abs=1e-8)
        assert expected_mean != pytest.approx(y1) and expected_mean != pytest.approx(y2)

    def test_variance_never_exceeds_prior(self):
        rng = np.random.default_rng(4)
        model = GpModel(noise_variance=1e-4)
        for _ in range(8):
            model.add(rng.uniform(0, 1, size=2), float(rng.normal()))
        for _ in range(50):
            _, variance = model.posterior(rng.uniform(-1, 2, size=2))
            assert variance <= 1.0 + 1e-9

    def test_nan_observation_rejected(self):
        model = GpModel()
        with pytest.raises(GpError):
            update_model(model, np.array([0.5]), float("nan"))

    def test_normalization_uses_bounds(self):
        bounded = GpModel(length_scale=0.2, bounds=((0.0, 12.0),))
        bounded.add(np.array([0.0]), 1.0)
        # 1.5 raw units are 0.125 normalized: still strongly correlated.
        mean, _ = bounded.posterior(np.array([1.5]))
        assert mean > 0.5


class TestAcquisition:
    def test_no_observations_returns_first_candidate(self):
        model = GpModel(bounds=((0.8, 1.0),))
        theta = propose_theta(model, ((0.8, 1.0),), UcbSchedule(2.0), 0)
        candidates = candidate_set(((0.8, 1.0),))
        assert theta[0] == candidates[0][0]

    def test_pure_exploitation_limit(self):
        class ZeroBeta(UcbSchedule):
            def beta(self, k):
                return 0.0

        model = GpModel(length_scale=0.1, noise_variance=1e-6, bounds=((0.0, 1.0),))
        model.add(np.array([0.25]), 1.0)
        model.add(np.array([0.75]), -1.0)
        theta = propose_theta(model, ((0.0, 1.0),), ZeroBeta(2.0), 5)
        means, _ = model.posterior_batch(candidate_set(((0.0, 1.0),)))
        best = candidate_set(((0.0, 1.0),))[int(np.argmax(means))]
        assert theta[0] == best[0]

    def test_grid_resolution_covers_bounds(self):
        candidates = candidate_set(((0.0, 12.0), (0.0, 12.0), (0.0, 12.0)))
        assert candidates.shape == (9**3, 3)
        assert candidates.min() == 0.0 and candidates.max() == 12.0

    def test_random_candidates_above_three_dims(self):
        rng = np.random.default_rng(0)
        candidates = candidate_set(((0.0, 1.0),) * 4, rng)
        assert candidates.shape == (512, 4)
        assert candidates.min() >= 0.0 and candidates.max() <= 1.0

    def test_ucb_locates_quadratic_optimum(self):
        """25 rounds of UCB on J(x) = -(x - 0.9)^2 over [0.8, 1.0] land
        within 0.02 of the optimum found by exhaustive grid search."""
        bounds = ((0.8, 1.0),)
        grid = candidate_set(bounds)
        oracle_best = grid[int(np.argmax(-((grid[:, 0] - 0.9) ** 2)))][0]
        model = GpModel(length_scale=0.2, noise_variance=1e-6, bounds=bounds)
        schedule = UcbSchedule(2.0)
        best_seen, best_value = None, -math.inf
        for k in range(25):
            theta = propose_theta(model, bounds, schedule, k)
            value = -((theta[0] - 0.9) ** 2)
            model.add(theta, value)
            if value > best_value:
                best_seen, best_value = theta[0], value
        assert abs(best_seen - oracle_best) <= 0.02
        assert abs(best_seen - 0.9) <= 0.02

    def test_recommendation_prefers_posterior_mean(self):
        model = GpModel(length_scale=0.2, noise_variance=1e-4, bounds=((0.0, 1.0),))
        model.add(np.array([0.2]), -0.5)
        model.add(np.array([0.8]), 0.5)
        assert recommend_theta(model)[0] == 0.8

    def test_schedule_nondecreasing(self):
        schedule = UcbSchedule(2.0)
        betas = [schedule.beta(k) for k in range(10)]
        assert all(b2 >= b1 for b1, b2 in zip(betas, betas[1:]))

"""Gaussian belief and unscented-update oracles."""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from lcdpf.gaussfilter import (
    GaussianBelief,
    UtParams,
    floor_spd,
    sigma_points,
    unscented_update,
)
from lcdpf.models import SensorConfig, expected_amplitude


def random_spd(rng, m):
    a = rng.normal(size=(m, m))
    return a @ a.T + m * np.eye(m)


def kalman_update(mean, cov, h_row, z, noise_var):
    """Closed-form scalar-measurement Kalman update for z = h_row @ x + v."""
    s = h_row @ cov @ h_row + noise_var
    gain = cov @ h_row / s
    new_mean = mean + gain * (z - h_row @ mean)
    new_cov = cov - np.outer(gain, h_row @ cov)
    return new_mean, new_cov


class TestGaussianBelief:
    def test_rejects_asymmetric_covariance(self):
        with pytest.raises(ValueError):
            GaussianBelief(np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            GaussianBelief(np.zeros(3), np.eye(2))

    def test_rejects_non_positive_definite(self):
        with pytest.raises(np.linalg.LinAlgError):
            GaussianBelief(np.zeros(2), np.diag([1.0, -1.0]))

    def test_logpdf_matches_scipy(self):
        rng = np.random.default_rng(0)
        cov = random_spd(rng, 3)
        mean = rng.normal(size=3)
        belief = GaussianBelief(mean, cov)
        pts = rng.normal(size=(20, 3))
        expected = multivariate_normal(mean, cov).logpdf(pts)
        assert np.allclose(belief.logpdf(pts), expected, atol=1e-10)

    def test_sample_moments(self):
        rng = np.random.default_rng(1)
        cov = np.array([[2.0, 0.3], [0.3, 0.5]])
        belief = GaussianBelief([1.0, -1.0], cov)
        draws = belief.sample(50_000, rng)
        assert np.allclose(draws.mean(axis=0), belief.mean, atol=0.03)
        assert np.allclose(np.cov(draws.T, bias=True), cov, atol=0.05)


class TestFloorSpd:
    def test_pd_matrix_unchanged(self):
        cov = np.array([[2.0, 0.1], [0.1, 1.0]])
        assert np.allclose(floor_spd(cov), cov)

    def test_negative_eigenvalue_floored(self):
        cov = np.diag([1.0, -0.5])
        floored = np.linalg.eigvalsh(floor_spd(cov))
        assert np.all(floored >= 1e-10 - 1e-16)


class TestSigmaPoints:
    def test_scalar_kappa_two_closed_form(self):
        belief = GaussianBelief([0.0], [[1.0]])
        points, weights = sigma_points(belief, UtParams(kappa=2.0))
        assert np.allclose(sorted(points.ravel()), [-np.sqrt(3), 0.0, np.sqrt(3)])
        assert weights[0] == pytest.approx(2 / 3)
        assert np.allclose(weights[1:], 1 / 6)

    def test_moment_matching(self):
        rng = np.random.default_rng(2)
        cov = random_spd(rng, 2)
        belief = GaussianBelief(rng.normal(size=2), cov)
        points, weights = sigma_points(belief, UtParams(kappa=1.0))
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(weights @ points, belief.mean, atol=1e-12)
        centered = points - belief.mean
        scatter = (weights[:, None] * centered).T @ centered
        assert np.allclose(scatter, cov, rtol=1e-10, atol=1e-10)

    def test_invalid_spread_rejected(self):
        belief = GaussianBelief(np.zeros(2), np.eye(2))
        with pytest.raises(ValueError):
            sigma_points(belief, UtParams(kappa=-2.0))


class TestUnscentedUpdate:
    def test_linear_model_matches_kalman(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            cov = random_spd(rng, 2)
            mean = rng.normal(size=2)
            h_row = rng.normal(size=2)
            z = rng.normal()
            noise_var = rng.uniform(0.1, 2.0)
            posterior = unscented_update(
                GaussianBelief(mean, cov), z, lambda pts: pts @ h_row, noise_var,
                UtParams(kappa=1.0),
            )
            km, kc = kalman_update(mean, cov, h_row, z, noise_var)
            assert np.allclose(posterior.mean, km, atol=1e-10)
            assert np.allclose(posterior.cov, kc, atol=1e-10)

    def test_uninformative_measurement_keeps_prior(self):
        prior = GaussianBelief([1.0, 2.0], np.diag([0.5, 1.5]))
        posterior = unscented_update(
            prior, 100.0, lambda pts: pts @ np.array([1.0, 0.0]), 1e12,
            UtParams(kappa=1.0),
        )
        assert np.allclose(posterior.mean, prior.mean, rtol=1e-6)
        assert np.allclose(posterior.cov, prior.cov, rtol=1e-6)

    def test_zero_innovation_keeps_mean_shrinks_covariance(self):
        prior = GaussianBelief([0.0, 0.0], np.eye(2))
        h = lambda pts: pts @ np.array([1.0, 1.0])
        params = UtParams(kappa=1.0)
        points, weights = sigma_points(prior, params)
        z_hat = weights @ h(points)
        posterior = unscented_update(prior, z_hat, h, 0.1, params)
        assert np.allclose(posterior.mean, prior.mean, atol=1e-12)
        assert np.trace(posterior.cov) < np.trace(prior.cov)

    def test_never_inflates_trace(self):
        rng = np.random.default_rng(4)
        cfg = SensorConfig()
        for _ in range(20):
            prior = GaussianBelief(rng.uniform(5, 35, 2), random_spd(rng, 2))
            site = rng.uniform(0, 40, 2)
            posterior = unscented_update(
                prior, rng.uniform(0, 1),
                lambda pts, s=site: expected_amplitude(pts, s, cfg),
                cfg.noise_var, UtParams(kappa=1.0),
            )
            assert np.trace(posterior.cov) <= np.trace(prior.cov) + 1e-10

    def test_sigma_point_order_invariance(self):
        """A hand-rolled UT update with permuted sigma points matches."""
        rng = np.random.default_rng(5)
        prior = GaussianBelief(rng.normal(size=2), random_spd(rng, 2))
        h = lambda pts: np.sin(pts[:, 0]) + pts[:, 1] ** 2
        noise_var, z = 0.3, 0.7
        params = UtParams(kappa=1.0)
        reference = unscented_update(prior, z, h, noise_var, params)
        points, weights = sigma_points(prior, params)
        perm = rng.permutation(points.shape[0])
        points, weights = points[perm], weights[perm]
        predicted = h(points)
        z_hat = weights @ predicted
        dz = predicted - z_hat
        s = weights @ (dz * dz) + noise_var
        gain = ((weights * dz) @ (points - prior.mean)) / s
        mean = prior.mean + gain * (z - z_hat)
        cov = prior.cov - np.outer(gain, gain) * s
        assert np.allclose(mean, reference.mean, atol=1e-12)
        assert np.allclose(cov, reference.cov, atol=1e-12)

    def test_finite_on_acoustic_model_near_singularity(self):
        cfg = SensorConfig()
        site = np.array([10.0, 10.0])
        prior = GaussianBelief([10.5, 10.0], 0.25 * np.eye(2))
        posterior = unscented_update(
            prior, 3.0, lambda pts: expected_amplitude(pts, site, cfg),
            cfg.noise_var, UtParams(kappa=1.0),
        )
        assert np.all(np.isfinite(posterior.mean))
        assert np.all(np.isfinite(posterior.cov))

"""Likelihood-consensus oracles, including the quadratic-surrogate exactness check."""

import numpy as np
import pytest
from scipy.special import logsumexp

from lcdpf.gaussfilter import GaussianBelief
from lcdpf.lc import (
    JlfApprox,
    clamp_log_jlf,
    likelihood_consensus,
    local_coefficients,
    log_jlf,
)
from lcdpf.network import build_topology, metropolis_weights
from lcdpf.polybasis import MonomialBasis, enumerate_exponents


def identity_basis(degree, m=2):
    return MonomialBasis(
        exponents=enumerate_exponents(m, degree),
        center=np.zeros(m),
        scale_tril=np.eye(m),
    )


def fully_connected_weights(k):
    positions = np.stack([np.arange(k, dtype=float), np.zeros(k)], axis=1)
    return metropolis_weights(build_topology(positions, comm_range=float(k)))


def linear_gaussian_loglik(z, pts, h_row, noise_var):
    residual = z - pts @ h_row
    return -0.5 * residual**2 / noise_var - 0.5 * np.log(2 * np.pi * noise_var)


class TestClamp:
    def test_centers_at_maximum(self):
        out = clamp_log_jlf(np.array([-50_000.0, -30_000.0, -30_100.0]))
        assert out.max() == 0.0
        assert np.allclose(out, [-700.0, 0.0, -100.0])

    def test_relative_weights_survive_deep_negatives(self):
        values = np.array([-1e6, -1e6 + 3.0, -1e6 + 1.0])
        out = clamp_log_jlf(values)
        weights = np.exp(out - logsumexp(out))
        reference = np.exp(values - logsumexp(values))
        assert np.allclose(weights, reference, atol=1e-12)

    def test_saturates_extreme_tail_only(self):
        out = clamp_log_jlf(np.array([0.0, -800.0, -10.0]))
        assert np.array_equal(out, [0.0, -700.0, -10.0])


class TestLocalCoefficients:
    def test_quadratic_surrogate_exact(self):
        rng = np.random.default_rng(0)
        h_row = np.array([0.6, -0.4])
        noise_var, z = 0.5, 0.3
        pts = rng.normal(size=(100, 2))
        basis = identity_basis(2)
        fit = local_coefficients(
            z, pts, basis, lambda z_, p: linear_gaussian_loglik(z_, p, h_row, noise_var)
        )
        fitted = basis.design_matrix(pts) @ fit.coefficients
        exact = linear_gaussian_loglik(z, pts, h_row, noise_var)
        assert np.allclose(fitted, exact, atol=1e-6)

    def test_constant_targets_yield_constant_coefficient(self):
        pts = np.random.default_rng(1).normal(size=(50, 2))
        basis = identity_basis(3)
        fit = local_coefficients(0.0, pts, basis, lambda z, p: np.full(p.shape[0], -4.2))
        assert fit.coefficients[0] == pytest.approx(-4.2, abs=1e-8)
        assert np.allclose(fit.coefficients[1:], 0.0, atol=1e-8)

    def test_deterministic(self):
        pts = np.random.default_rng(2).normal(size=(60, 2))
        basis = identity_basis(2)
        kwargs = dict(
            z=0.1, particles=pts, basis=basis,
            loglik=lambda z, p: linear_gaussian_loglik(z, p, np.ones(2), 1.0),
        )
        a = local_coefficients(**kwargs)
        b = local_coefficients(**kwargs)
        assert np.array_equal(a.coefficients, b.coefficients)


class TestConsensusOnCoefficients:
    def test_exact_sum_on_fully_connected_graph(self):
        rng = np.random.default_rng(3)
        k, r = 4, 10
        rows = rng.normal(size=(k, r))
        out, report = likelihood_consensus(fully_connected_weights(k), rows, 1, k)
        exact = rows[:, 1:].sum(axis=0)
        for i in range(k):
            assert np.allclose(out[i, 1:], exact, atol=1e-12)
            assert out[i, 0] == rows[i, 0]  # own constant kept, not transmitted
        assert report.scalars_sent_per_sensor == r - 1

    def test_converges_on_sparse_graph(self):
        rng = np.random.default_rng(4)
        positions = rng.uniform(0, 40, size=(25, 2))
        topo = build_topology(positions, 25.0)
        w = metropolis_weights(topo)
        rows = rng.normal(size=(25, 5))
        out, _ = likelihood_consensus(w, rows, 500, 25)
        exact = rows[:, 1:].sum(axis=0)
        assert np.allclose(out[:, 1:], exact, atol=1e-6)

    def test_identical_rows_fixed_point(self):
        k = 9
        row = np.arange(6.0)
        rows = np.tile(row, (k, 1))
        out, _ = likelihood_consensus(fully_connected_weights(k), rows, 3, k)
        assert np.allclose(out[:, 1:], k * row[1:], atol=1e-10)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            likelihood_consensus(fully_connected_weights(2), np.zeros((3, 4)), 1, 2)


class TestJointLikelihoodApproximation:
    def test_zero_coefficients_zero_everywhere(self):
        basis = identity_basis(2)
        approx = JlfApprox(coefficients=np.zeros(basis.size), basis=basis)
        pts = np.random.default_rng(5).normal(size=(10, 2))
        assert np.allclose(log_jlf(approx, pts), 0.0)

    def test_single_sensor_reduction(self):
        rng = np.random.default_rng(6)
        pts = rng.normal(size=(80, 2))
        basis = identity_basis(2)
        fit = local_coefficients(
            0.2, pts, basis,
            lambda z, p: linear_gaussian_loglik(z, p, np.array([1.0, 0.5]), 0.4),
        )
        rows = fit.coefficients[None, :]
        out, _ = likelihood_consensus(np.array([[1.0]]), rows, 5, 1)
        approx = JlfApprox(coefficients=out[0], basis=basis)
        fitted = basis.design_matrix(pts) @ fit.coefficients
        assert np.allclose(log_jlf(approx, pts), fitted, atol=1e-12)

    def test_two_sensor_quadratic_jlf_matches_exact(self):
        """Exact quadratic fits + exact consensus reproduce the log-JLF up to a
        constant (the untransmitted constant coefficient)."""
        rng = np.random.default_rng(7)
        k = 2
        rows_h = [np.array([0.9, -0.2]), np.array([-0.3, 1.1])]
        zs = [0.5, -0.1]
        noise_var = 0.6
        # common whitened basis; each sensor fits on its own draws
        basis = identity_basis(2)
        draws = [rng.normal(size=(100, 2)) for _ in range(k)]
        coeff_rows = np.stack(
            [
                local_coefficients(
                    zs[i], draws[i], basis,
                    lambda z, p, i=i: linear_gaussian_loglik(z, p, rows_h[i], noise_var),
                ).coefficients
                for i in range(k)
            ]
        )
        summed, _ = likelihood_consensus(fully_connected_weights(k), coeff_rows, 1, k)
        approx = JlfApprox(coefficients=summed[0], basis=basis)
        test_pts = rng.normal(size=(100, 2))
        approx_vals = log_jlf(approx, test_pts)
        exact_vals = sum(
            linear_gaussian_loglik(zs[i], test_pts, rows_h[i], noise_var)
            for i in range(k)
        )
        centered_gap = (approx_vals - exact_vals) - np.mean(approx_vals - exact_vals)
        assert np.max(np.abs(centered_gap)) < 1e-6

    def test_additive_constant_invariance_of_weights(self):
        rng = np.random.default_rng(8)
        values = rng.normal(size=200)
        shifted = values + 123.456
        w_a = np.exp(values - logsumexp(values))
        w_b = np.exp(shifted - logsumexp(shifted))
        assert np.allclose(w_a, w_b, atol=1e-12)

    def test_coefficientwise_sum_identity(self):
        """Per-sensor expansions sum to the joint expansion coefficientwise."""
        rng = np.random.default_rng(9)
        basis = identity_basis(2)
        pts = rng.normal(size=(120, 2))  # shared draws isolate the identity
        rows_h = [rng.normal(size=2) for _ in range(3)]
        zs = rng.normal(size=3)
        fits = [
            local_coefficients(
                zs[i], pts, basis,
                lambda z, p, i=i: linear_gaussian_loglik(z, p, rows_h[i], 0.8),
            ).coefficients
            for i in range(3)
        ]
        joint = local_coefficients(
            0.0, pts, basis,
            lambda z, p: sum(
                linear_gaussian_loglik(zs[i], p, rows_h[i], 0.8) for i in range(3)
            ),
        ).coefficients
        assert np.allclose(np.sum(fits, axis=0), joint, atol=1e-8)

    def test_centered_fidelity_improves_with_degree(self):
        """Fit error against the exact acoustic log-likelihood shrinks with R_p."""
        from lcdpf.models import SensorConfig, local_log_likelihood

        rng = np.random.default_rng(10)
        cfg = SensorConfig()
        site = np.array([20.0, 20.0])
        cloud = GaussianBelief([23.0, 21.0], 0.25 * np.eye(2))
        pts = cloud.sample(400, rng)
        z = 0.8
        errors = []
        for degree in (2, 4, 6):
            basis = MonomialBasis.from_belief(degree, cloud)
            fit = local_coefficients(
                z, pts, basis, lambda z_, p: local_log_likelihood(z_, p, site, cfg)
            )
            fitted = basis.design_matrix(pts) @ fit.coefficients
            exact = local_log_likelihood(z, pts, site, cfg)
            gap = (fitted - exact) - np.mean(fitted - exact)
            errors.append(np.sqrt(np.mean(gap**2)))
        assert errors[2] <= errors[1] <= errors[0]

    def test_coefficient_length_validated(self):
        basis = identity_basis(2)
        with pytest.raises(ValueError):
            JlfApprox(coefficients=np.zeros(basis.size - 1), basis=basis)

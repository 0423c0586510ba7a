"""Motion and sensing models for acoustic-amplitude target tracking.

The ground-truth target follows a constant-velocity model in 4-D state
(position + velocity).  The filters deliberately use a mismatched 2-D
random-walk model on position only.  Sensors measure the received acoustic
amplitude A / ||x - xi||^2 corrupted by additive Gaussian noise.
"""

import math
from dataclasses import dataclass

import numpy as np


def cv_matrices(period=1.0):
    """Constant-velocity transition matrices (G, W) for step length `period`."""
    t = float(period)
    g = np.array(
        [
            [1.0, 0.0, t, 0.0],
            [0.0, 1.0, 0.0, t],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    w = np.array(
        [
            [t * t / 2.0, 0.0],
            [0.0, t * t / 2.0],
            [t, 0.0],
            [0.0, t],
        ]
    )
    return g, w


@dataclass
class MotionConfig:
    """Driving-noise covariances for the truth and filter motion models."""

    truth_driving_cov: np.ndarray
    filter_driving_cov: np.ndarray
    step_period: float = 1.0

    def __post_init__(self):
        self.truth_driving_cov = np.asarray(self.truth_driving_cov, dtype=float)
        self.filter_driving_cov = np.asarray(self.filter_driving_cov, dtype=float)
        for name in ("truth_driving_cov", "filter_driving_cov"):
            cov = getattr(self, name)
            if cov.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
            if np.any(cov != np.diag(np.diag(cov))):
                raise ValueError(f"{name} must be diagonal")
            if np.any(np.diag(cov) <= 0):
                raise ValueError(f"{name} must have positive diagonal")
        if self.step_period <= 0:
            raise ValueError("step_period must be positive")


@dataclass
class SensorConfig:
    """Acoustic amplitude sensor parameters."""

    amplitude: float = 10.0
    noise_var: float = 5e-5
    min_dist_sq: float = 1e-4  # squared-distance clamp keeping the likelihood finite

    def __post_init__(self):
        if self.amplitude <= 0 or self.noise_var <= 0 or self.min_dist_sq <= 0:
            raise ValueError("amplitude, noise_var and min_dist_sq must be positive")


def propagate_truth(prev, cfg, rng):
    """Advance the 4-D truth state one step: G tau + W u', u' ~ N(0, C_u')."""
    prev = np.asarray(prev, dtype=float)
    g, w = cv_matrices(cfg.step_period)
    noise = np.sqrt(np.diag(cfg.truth_driving_cov)) * rng.standard_normal(2)
    return g @ prev + w @ noise


def sample_transition(prev, cfg, rng):
    """Random-walk step(s): prev + u with u ~ N(0, C_u).

    `prev` may be a single position (2,) or a stack (J, 2); the output has
    the same shape.
    """
    prev = np.asarray(prev, dtype=float)
    std = np.sqrt(np.diag(cfg.filter_driving_cov))
    return prev + std * rng.standard_normal(prev.shape)


def transition_logpdf(x, x_prev, cfg):
    """log N(x; x_prev, C_u), vectorized over stacked states."""
    diff = np.atleast_2d(np.asarray(x, dtype=float) - np.asarray(x_prev, dtype=float))
    var = np.diag(cfg.filter_driving_cov)
    out = -0.5 * np.sum(diff * diff / var, axis=1) - 0.5 * np.sum(
        np.log(2.0 * np.pi * var)
    )
    return out if np.ndim(x) > 1 else float(out[0])


def expected_amplitude(x, site_pos, cfg):
    """Noise-free measurement A / max(||x - xi||^2, clamp), vectorized."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    diff = pts - np.asarray(site_pos, dtype=float)
    dist_sq = np.maximum(np.einsum("ij,ij->i", diff, diff), cfg.min_dist_sq)
    out = cfg.amplitude / dist_sq
    return out if np.ndim(x) > 1 else float(out[0])


def sense(target_pos, site_pos, cfg, rng):
    """One noisy amplitude measurement of the target at this sensor."""
    noise = math.sqrt(cfg.noise_var) * rng.standard_normal()
    return expected_amplitude(target_pos, site_pos, cfg) + noise


def local_log_likelihood(z, x, site_pos, cfg):
    """log f(z | x) for one sensor; vectorized over stacked states."""
    residual = z - expected_amplitude(x, site_pos, cfg)
    return -0.5 * residual * residual / cfg.noise_var - 0.5 * math.log(
        2.0 * math.pi * cfg.noise_var
    )


@dataclass
class AcousticModel:
    """Measurement-model interface used by the filters.

    Any object with the same `predict` / `loglik` / `sample` / `noise_var`
    surface can be substituted (the tests use a linear-Gaussian surrogate).
    """

    cfg: SensorConfig

    @property
    def noise_var(self):
        return self.cfg.noise_var

    def predict(self, x, site_pos):
        return expected_amplitude(x, site_pos, self.cfg)

    def loglik(self, z, x, site_pos):
        return local_log_likelihood(z, x, site_pos, self.cfg)

    def sample(self, x, site_pos, rng):
        return sense(x, site_pos, self.cfg, rng)

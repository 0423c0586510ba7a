"""Gaussian beliefs and the unscented-transform measurement update."""

import math
from dataclasses import dataclass

import numpy as np

COV_SYMMETRY_TOL = 1e-12
COV_EIGENVALUE_FLOOR = 1e-10


def floor_spd(cov, floor=COV_EIGENVALUE_FLOOR):
    """Symmetrize and floor the eigenvalues of a covariance matrix."""
    cov = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(cov)
    if np.all(eigvals >= floor):
        return cov
    return (eigvecs * np.maximum(eigvals, floor)) @ eigvecs.T


@dataclass
class GaussianBelief:
    """Mean and symmetric positive-definite covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if self.cov.shape != (self.dim, self.dim):
            raise ValueError("covariance shape does not match mean")
        scale = max(np.abs(self.cov).max(), 1.0)
        if np.abs(self.cov - self.cov.T).max() > COV_SYMMETRY_TOL * scale:
            raise ValueError("covariance is not symmetric")
        self.cov = 0.5 * (self.cov + self.cov.T)
        # fails loudly on non-PD input
        self._chol = np.linalg.cholesky(self.cov)

    @property
    def dim(self):
        return self.mean.shape[0]

    def sample(self, n, rng):
        """n draws via the Cholesky factor, shape (n, dim)."""
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ self._chol.T

    def logpdf(self, x):
        """Gaussian log-density, vectorized over stacked points."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        diff = pts - self.mean
        solved = np.linalg.solve(self._chol, diff.T)
        quad = np.einsum("ij,ij->j", solved, solved)
        norm = self.dim * math.log(2.0 * math.pi) + 2.0 * np.sum(
            np.log(np.diag(self._chol))
        )
        out = -0.5 * (quad + norm)
        return out if np.ndim(x) > 1 else float(out[0])


@dataclass
class UtParams:
    """Sigma-point spread parameter; kappa = 3 - M is the classic default."""

    kappa: float = 1.0


def sigma_points(belief, params):
    """Standard 2M+1 sigma-point set for the belief.

    Point 0 is the mean with weight kappa/(M+kappa); points +-i are
    mean +- column i of sqrt((M+kappa) cov) with weight 1/(2(M+kappa)).
    """
    m = belief.dim
    scale = m + params.kappa
    if scale <= 0:
        raise ValueError("M + kappa must be positive")
    spread = np.linalg.cholesky(scale * belief.cov)
    points = np.empty((2 * m + 1, m))
    points[0] = belief.mean
    points[1 : m + 1] = belief.mean + spread.T
    points[m + 1 :] = belief.mean - spread.T
    weights = np.full(2 * m + 1, 1.0 / (2.0 * scale))
    weights[0] = params.kappa / scale
    return points, weights


def unscented_update(prior, z, h, noise_var, params):
    """UT measurement update for a scalar measurement z = h(x) + noise.

    `h` maps stacked states (n, M) to predicted scalar measurements (n,).
    """
    points, weights = sigma_points(prior, params)
    predicted = np.asarray(h(points), dtype=float)
    z_hat = weights @ predicted
    dz = predicted - z_hat
    innovation_var = weights @ (dz * dz) + noise_var
    if innovation_var <= 0:
        raise ValueError("non-positive innovation variance")
    dx = points - prior.mean
    cross_cov = (weights * dz) @ dx
    gain = cross_cov / innovation_var
    mean = prior.mean + gain * (z - z_hat)
    cov = floor_spd(prior.cov - np.outer(gain, gain) * innovation_var)
    return GaussianBelief(mean=mean, cov=cov)

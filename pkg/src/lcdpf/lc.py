"""Likelihood consensus: distributed approximation of the joint likelihood.

Each sensor fits a polynomial expansion of its local log-likelihood on its
own proposal draws; the expansion coefficients are summed network-wide by
average consensus.  The constant coefficient is fitted but never
transmitted: it only shifts the log joint likelihood by a constant, which
cancels in weight normalization.
"""

from dataclasses import dataclass

import numpy as np

from lcdpf.network import consensus_sum
from lcdpf.polybasis import MonomialBasis, fit_least_squares

# overflow guard applied before any exponentiation of the approximate
# log joint likelihood
LOG_JLF_CLAMP = 700.0


def clamp_log_jlf(values):
    """Center log-JLF values at their maximum, then clamp for exp safety.

    Centering first keeps the clamp from flattening the relative weights
    when every value is far below zero; only the (irrelevant) extreme
    tail is saturated.
    """
    values = np.asarray(values, dtype=float)
    return np.clip(values - values.max(), -LOG_JLF_CLAMP, LOG_JLF_CLAMP)


@dataclass
class JlfApprox:
    """Summed expansion coefficients plus the shared basis."""

    coefficients: np.ndarray
    basis: MonomialBasis

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.basis.size,):
            raise ValueError("coefficient length must match basis size")


def local_coefficients(z, particles, basis, loglik):
    """Fit this sensor's expansion on its own draws.

    `loglik(z, particles)` returns the local log-likelihood at each particle.
    """
    targets = loglik(z, particles)
    return fit_least_squares(basis, particles, targets)


def likelihood_consensus(weights, coefficient_rows, iterations, k):
    """Sum per-sensor coefficient vectors over the network.

    The constant (first) coefficient is excluded from the payload; each
    sensor keeps its own locally fitted constant, which leaves the result
    correct up to an additive constant in log domain.
    Returns the per-sensor (K, R) coefficient estimates and the report.
    """
    rows = np.asarray(coefficient_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] != k:
        raise ValueError("expected one coefficient vector per sensor")
    summed, report = consensus_sum(weights, rows[:, 1:], iterations, k)
    out = np.empty_like(rows)
    out[:, 0] = rows[:, 0]
    out[:, 1:] = summed
    return out, report


def log_jlf(approx, x):
    """Approximate log joint likelihood at stacked states (or one state)."""
    values = approx.basis.design_matrix(np.atleast_2d(x)) @ approx.coefficients
    return values if np.ndim(x) > 1 else float(values[0])

"""Distributed adaptation of the Gaussian proposal density.

Each sensor updates an inflated predicted posterior (covariance scaled by
K) with its own measurement, producing a local pseudoposterior.  The
pseudoposteriors are fused in information form by consensus: the fused
precision is the sum of the local precisions, so the product of all K
pseudoposteriors is recovered as the network-wide proposal.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from lcdpf.gaussfilter import GaussianBelief, floor_spd, unscented_update
from lcdpf.network import ConsensusReport, consensus_sum

# the per-iteration payload carries one extra bookkeeping scalar beyond the
# M + M(M+1)/2 information entries; it carries no estimation content but is
# included in the communication accounting
SYNC_SCALARS_PER_ITERATION = 1


def predicted_moments(temp_particles):
    """Sample mean and (1/J-normalized) covariance of transition draws."""
    pts = np.asarray(temp_particles, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two particles")
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    return GaussianBelief(mean=mean, cov=floor_spd(cov))


def local_pseudoposterior(pred, z, k, h, noise_var, ut):
    """UT update of the inflated prior N(mu', K C') with this sensor's z."""
    if k < 1:
        raise ValueError("k must be at least 1")
    inflated = GaussianBelief(mean=pred.mean, cov=k * pred.cov)
    return unscented_update(inflated, z, h, noise_var, ut)


def _spd_inverse(cov):
    factor = cho_factor(cov, lower=True)
    inv = cho_solve(factor, np.eye(cov.shape[0]))
    return 0.5 * (inv + inv.T)


def _pack(info_vec, precision, triu):
    return np.concatenate([info_vec, precision[triu]])


def _unpack(payload, m, triu):
    info_vec = payload[:m]
    precision = np.zeros((m, m))
    precision[triu] = payload[m:]
    precision = precision + np.triu(precision, 1).T
    return info_vec, precision


def fuse_pseudoposteriors(weights, beliefs, iterations, k):
    """Consensus fusion of per-sensor pseudoposteriors into the proposal.

    Each sensor transmits its information vector and the upper triangle of
    its precision matrix; the summed precision is inverted locally.
    Returns one GaussianBelief per sensor and a ConsensusReport.
    """
    m = beliefs[0].dim
    triu = np.triu_indices(m)
    payloads = []
    for belief in beliefs:
        precision = _spd_inverse(belief.cov)
        payloads.append(_pack(precision @ belief.mean, precision, triu))
    summed, data_report = consensus_sum(weights, payloads, iterations, k)
    report = ConsensusReport(
        iterations=iterations,
        payload_dim=data_report.payload_dim + SYNC_SCALARS_PER_ITERATION,
    )
    fused = []
    for row in summed:
        info_vec, precision_sum = _unpack(row, m, triu)
        cov = _spd_inverse(precision_sum)
        fused.append(GaussianBelief(mean=cov @ info_vec, cov=floor_spd(cov)))
    return fused, report

"""Pure-numpy implementations of the hot kernels."""

import numpy as np


def design_matrix(points, exponents):
    """Evaluate monomials prod_i y_i^(e_i) at each point.

    points : (J, M) float64, already whitened
    exponents : (R, M) int64 multi-indices
    returns (J, R) float64
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    exponents = np.ascontiguousarray(exponents, dtype=np.int64)
    n_pts, n_dim = points.shape
    out = np.ones((n_pts, exponents.shape[0]))
    for i in range(n_dim):
        max_deg = int(exponents[:, i].max(initial=0))
        table = np.ones((n_pts, max_deg + 1))
        if max_deg > 0:
            # table[:, d] = y_i^d
            table[:, 1:] = np.cumprod(
                np.repeat(points[:, i : i + 1], max_deg, axis=1), axis=1
            )
        out *= table[:, exponents[:, i]]
    return out


def systematic_resample_indices(weights, offset):
    """Systematic resampling: stratified positions (j + offset)/J.

    weights : (J,) normalized weights
    offset : uniform draw in [0, 1)
    returns (J,) int64 ancestor indices in strata order
    """
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    positions = (np.arange(n) + offset) / n
    idx = np.searchsorted(np.cumsum(weights), positions, side="right")
    return np.minimum(idx, n - 1).astype(np.int64)

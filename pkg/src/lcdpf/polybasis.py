"""Multivariate monomial basis in whitened coordinates.

Raw monomials of degree 6 on 40 m coordinates are numerically hopeless, so
the basis is defined on y = L^-1 (x - c).  All sensors must share (c, L)
for the consensus sum of expansion coefficients to be meaningful.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.linalg import solve_triangular

from lcdpf import _kernels


def enumerate_exponents(m, degree):
    """All multi-indices with total degree <= degree, graded-lex ordered.

    Within a degree block, indices are ordered lexicographically descending,
    so M=2, degree=1 yields [(0,0), (1,0), (0,1)].  Returns (R, m) int64.
    """
    if m < 1 or degree < 0:
        raise ValueError("need m >= 1 and degree >= 0")
    exps = [e for e in product(range(degree + 1), repeat=m) if sum(e) <= degree]
    exps.sort(key=lambda e: (sum(e), tuple(-v for v in e)))
    return np.asarray(exps, dtype=np.int64)


def make_whitening(belief):
    """Whitening map from a Gaussian belief: center = mean, L = chol(cov)."""
    center = np.asarray(belief.mean, dtype=float)
    tril = np.linalg.cholesky(np.asarray(belief.cov, dtype=float))
    return center, tril


@dataclass
class MonomialBasis:
    """Monomial basis phi_r(x) = prod_i y_i^(e_ri), y = L^-1 (x - c)."""

    exponents: np.ndarray  # (R, M) int64
    center: np.ndarray  # (M,)
    scale_tril: np.ndarray  # (M, M) lower triangular
    include_constant: bool = True  # governs consensus transmission, not fitting

    def __post_init__(self):
        self.exponents = np.asarray(self.exponents, dtype=np.int64)
        self.center = np.asarray(self.center, dtype=float)
        self.scale_tril = np.asarray(self.scale_tril, dtype=float)
        if np.any(np.diag(self.scale_tril) <= 0):
            raise ValueError("whitening factor must have positive diagonal")

    @classmethod
    def from_belief(cls, degree, belief, include_constant=True):
        center, tril = make_whitening(belief)
        return cls(
            exponents=enumerate_exponents(belief.dim, degree),
            center=center,
            scale_tril=tril,
            include_constant=include_constant,
        )

    @classmethod
    def from_region(cls, degree, lo, hi, include_constant=True):
        """Fixed map sending the box [lo, hi] to [-1, 1]^M."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls(
            exponents=enumerate_exponents(lo.shape[0], degree),
            center=0.5 * (lo + hi),
            scale_tril=np.diag(0.5 * (hi - lo)),
            include_constant=include_constant,
        )

    @property
    def size(self):
        return self.exponents.shape[0]

    @property
    def dim(self):
        return self.exponents.shape[1]

    def whiten(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return solve_triangular(self.scale_tril, (pts - self.center).T, lower=True).T

    def design_matrix(self, points):
        """(J, R) matrix of basis values at stacked states."""
        return _kernels.design_matrix(self.whiten(points), self.exponents)


def eval_basis(basis, x):
    """Basis vector (R,) at a single state."""
    return basis.design_matrix(np.atleast_2d(x))[0]


@dataclass
class FitResult:
    coefficients: np.ndarray
    rank: int
    rank_deficient: bool = field(init=False)
    columns: int = 0

    def __post_init__(self):
        self.columns = self.coefficients.shape[0]
        self.rank_deficient = self.rank < self.columns


def fit_least_squares(basis, particles, targets):
    """Least-squares expansion coefficients for targets over the particles.

    Uses SVD-based lstsq, so a rank-deficient design matrix yields the
    minimum-norm solution; the deficiency is reported, not raised.
    """
    phi = basis.design_matrix(particles)
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (phi.shape[0],):
        raise ValueError("one target per particle required")
    coeffs, _, rank, _ = np.linalg.lstsq(phi, targets, rcond=None)
    return FitResult(coefficients=coeffs, rank=int(rank))

"""Real symmetric linear algebra: dense and banded eigensolvers, SPD matrix
functions, and log-determinants.

All matrices are plain float64 numpy arrays.  Dense inputs must be symmetric
(checked), banded inputs are symmetric by construction of SymmetricBanded.
Dense and banded solves are backed by LAPACK (numpy.linalg / scipy.linalg),
which meets the backward-stable accuracy contracts stated per function; the
dense path additionally verifies its residuals against the caller's tol.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, NotPositiveDefiniteError, ValidationError

# Relative pivot threshold below which a determinant is reported as zero.
# Matches the root-residual tolerance used by the polynomial layer.
SINGULAR_PIVOT_RTOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Full spectrum, ascending; vectors are orthonormal columns (or None)."""

    values: np.ndarray
    vectors: np.ndarray | None


@dataclass
class SymmetricBanded:
    """Symmetric n x n matrix with `bandwidth` nonzero super-diagonals.

    bands[d, j] holds entry (j, j+d) for 0-based j (d = 0 is the diagonal);
    each band is padded with trailing zeros to length dim.  Only the upper
    bands are stored, so symmetry holds by construction.
    """

    dim: int
    bandwidth: int
    bands: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if self.bandwidth < 0:
            raise ValidationError(f"bandwidth must be >= 0, got {self.bandwidth}")
        self.bands = np.asarray(self.bands, dtype=float)
        if self.bands.shape != (self.bandwidth + 1, self.dim):
            raise ValidationError(
                f"bands must have shape {(self.bandwidth + 1, self.dim)}, "
                f"got {self.bands.shape}"
            )

    @classmethod
    def zeros(cls, dim: int, bandwidth: int) -> "SymmetricBanded":
        return cls(dim, bandwidth, np.zeros((bandwidth + 1, dim)))

    @classmethod
    def from_dense(cls, m: np.ndarray, bandwidth: int) -> "SymmetricBanded":
        m = require_symmetric(m)
        n = m.shape[0]
        out = cls.zeros(n, bandwidth)
        for d in range(bandwidth + 1):
            out.bands[d, : n - d] = np.diagonal(m, d)
        return out

    def entry(self, i: int, j: int) -> float:
        """Entry (i, j), 0-based; zero outside the band."""
        i, j = (i, j) if i <= j else (j, i)
        d = j - i
        if d > self.bandwidth:
            return 0.0
        return float(self.bands[d, i])

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.dim, self.dim))
        for d in range(self.bandwidth + 1):
            idx = np.arange(self.dim - d)
            m[idx, idx + d] = self.bands[d, : self.dim - d]
            m[idx + d, idx] = self.bands[d, : self.dim - d]
        return m

    def scipy_band_upper(self) -> np.ndarray:
        """Band layout expected by scipy.linalg.eig_banded (upper form)."""
        u = self.bandwidth
        ab = np.zeros((u + 1, self.dim))
        for d in range(u + 1):
            ab[u - d, d:] = self.bands[d, : self.dim - d]
        return ab


def require_symmetric(m: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Return m as a float array, raising if it is not square symmetric."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    if np.abs(m - m.T).max(initial=0.0) > rtol * scale:
        raise ValidationError("matrix is not symmetric")
    return m


def eigh_dense(m: np.ndarray, tol: float = 1e-9) -> EigenDecomposition:
    """Full spectrum and orthonormal eigenvectors of a symmetric matrix.

    Residual ||M v - lambda v|| and the orthonormality defect are verified
    to be below tol * max(1, ||M||); violations raise ConvergenceError.
    """
    m = require_symmetric(m)
    if tol <= 0:
        raise ValidationError("tol must be positive")
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"dense eigensolver did not converge: {exc}") from exc
    scale = max(1.0, float(np.abs(values).max()) if values.size else 0.0)
    residual = float(np.abs(m @ vectors - vectors * values).max())
    ortho = float(np.abs(vectors.T @ vectors - np.eye(m.shape[0])).max())
    worst = max(residual, ortho)
    if worst > tol * scale:
        raise ConvergenceError(
            f"eigendecomposition residual {worst:.3e} exceeds {tol:.1e} * {scale:.3e}",
            worst_residual=worst,
        )
    return EigenDecomposition(values=values, vectors=vectors)


def eigh_banded(m: SymmetricBanded, tol: float = 1e-9) -> np.ndarray:
    """All eigenvalues of a symmetric banded matrix, ascending.

    Backward-stable: each value is within tol * max(1, ||M||) of a true
    eigenvalue.  Requires bandwidth < dim (densify wider matrices first).
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if m.bandwidth >= m.dim:
        raise ValidationError(
            f"bandwidth {m.bandwidth} >= dim {m.dim}: densify and use eigh_dense"
        )
    try:
        values = scipy.linalg.eigvals_banded(m.scipy_band_upper(), lower=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"banded eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise ConvergenceError("banded eigensolver produced non-finite values")
    return np.sort(values)


def spd_inv_sqrt(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Inverse square root S of a positive definite matrix, S M S = I.

    The smallest eigenvalue must exceed tol; otherwise the matrix is
    rejected (this is how invalid gamma configurations surface downstream).
    """
    m = require_symmetric(m)
    values, vectors = eigh_dense(m, tol=max(tol, 1e-12))
    min_eig = float(values[0])
    if min_eig <= tol:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite: smallest eigenvalue {min_eig:.6e} "
            f"<= tol {tol:.1e}",
            min_eigenvalue=min_eig,
        )
    s = (vectors / np.sqrt(values)) @ vectors.T
    return (s + s.T) / 2.0


def log_abs_det(m: np.ndarray) -> tuple[int, float]:
    """(sign, log|det|) via LU with partial pivoting.

    sign is 0 with log|det| = -inf when some pivot falls below
    SINGULAR_PIVOT_RTOL times the max row sum norm (numerical singularity).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    row_norm = float(np.abs(m).sum(axis=1).max()) if m.size else 0.0
    if row_norm == 0.0:
        return 0, -np.inf
    with warnings.catch_warnings():
        # exactly singular input is a supported outcome, not a failure
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.diagonal(lu)
    if np.abs(pivots).min() <= SINGULAR_PIVOT_RTOL * row_norm:
        return 0, -np.inf
    sign = 1 if (piv != np.arange(len(piv))).sum() % 2 == 0 else -1
    sign *= 1 if (pivots < 0).sum() % 2 == 0 else -1
    return sign, float(np.log(np.abs(pivots)).sum())

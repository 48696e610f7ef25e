"""Matrix orthogonal polynomial recurrences, matrix Chebyshev polynomials,
and root computation via the block Jacobi matrix.

The three-term recurrence is

    x R_m(x) = A_{m+1} R_{m+1}(x) + B_m R_m(x) + A_m^T R_{m-1}(x)

with R_{-1} = 0, R_0 = I.  A coefficient set holds A_1..A_m and B_0..B_{m-1}
as symmetric p x p blocks (the transpose is kept in eval_R regardless, so the
recurrence stays correct for general nonsingular A).  Roots of det R_m are
never found by polynomial root-finding: they are the eigenvalues of the block
Jacobi matrix built from the coefficients, and the determinant path is kept
only as a residual check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ensemble import GammaWeights
from .errors import NumericalError, ValidationError
from .linalg import SymmetricBanded, eigh_banded, log_abs_det

RAW = "raw"
BY_SQRT_N = "by_sqrt_n"


@dataclass
class RecurrenceCoeffs:
    """Blocks A_1..A_m (nonsingular) and B_0..B_{m-1} (symmetric) of size p."""

    p: int
    m: int
    A: list[np.ndarray]
    B: list[np.ndarray]

    def __post_init__(self):
        if len(self.A) != self.m or len(self.B) != self.m:
            raise ValidationError(
                f"expected {self.m} A and B blocks, got {len(self.A)}, {len(self.B)}"
            )
        self.A = [np.asarray(a, dtype=float) for a in self.A]
        self.B = [np.asarray(b, dtype=float) for b in self.B]
        for name, blocks in (("A", self.A), ("B", self.B)):
            for i, blk in enumerate(blocks):
                if blk.shape != (self.p, self.p):
                    raise ValidationError(f"{name} block {i} has shape {blk.shape}")
                if np.abs(blk - blk.T).max(initial=0.0) > 1e-12 * max(
                    1.0, np.abs(blk).max(initial=0.0)
                ):
                    raise ValidationError(f"{name} block {i} is not symmetric")
        for i, a in enumerate(self.A, start=1):
            row_norm = float(np.abs(a).sum(axis=1).max())
            sign, logabs = log_abs_det(a)
            if sign == 0 or logabs <= self.p * math.log(max(row_norm, 1e-300)) + math.log(1e-12):
                raise ValidationError(f"A_{i} is numerically singular")


class MarkovBound(NamedTuple):
    """One evaluation of the resolvent-type quadratic form and its bounds."""

    lhs: float
    upper: float
    lower_applicable: bool
    lower: float


def _tilde_A_block(i: int, w: GammaWeights) -> np.ndarray:
    q, l = np.indices((w.p, w.p)) + 1
    gamma = np.asarray(w.gamma)
    return np.sqrt(((i - 1) * w.p + np.maximum(q, l)) * gamma[w.p - np.abs(q - l) - 1] / 2.0)


def _tilde_B_block(i: int, w: GammaWeights) -> np.ndarray:
    q, l = np.indices((w.p, w.p)) + 1
    gamma = np.asarray(w.gamma)
    off = np.abs(q - l)
    blk = np.sqrt((i * w.p + np.minimum(q, l)) * gamma[np.where(off > 0, off - 1, 0)] / 2.0)
    blk[off == 0] = 0.0
    return blk


def recurrence_coeffs(n: int, w: GammaWeights, scale: str = RAW) -> RecurrenceCoeffs:
    """Coefficient blocks for matrix size n, either raw or divided by sqrt(n).

    The raw blocks are exactly the tilde-A/tilde-B patterns driving the block
    Jacobi matrix; the by_sqrt_n variant converges stagewise to the
    sqrt(s*p)-homogeneous limit family used by the spectral layer.
    """
    if n % w.p != 0:
        raise ValidationError(f"n={n} must be divisible by p={w.p}")
    if scale not in (RAW, BY_SQRT_N):
        raise ValidationError(f"scale must be '{RAW}' or '{BY_SQRT_N}', got {scale!r}")
    m = n // w.p
    factor = 1.0 / math.sqrt(n) if scale == BY_SQRT_N else 1.0
    a_blocks = [factor * _tilde_A_block(i, w) for i in range(1, m + 1)]
    b_blocks = [factor * _tilde_B_block(i, w) for i in range(m)]
    return RecurrenceCoeffs(p=w.p, m=m, A=a_blocks, B=b_blocks)


def eval_R(coeffs: RecurrenceCoeffs, m: int, x: complex) -> np.ndarray:
    """R_m(x) by running the recurrence; x may be real or complex.

    Each stage solves against A_{j+1} via LU with partial pivoting; a
    numerically singular stage raises NumericalError naming it.
    """
    if not 0 <= m <= coeffs.m:
        raise ValidationError(f"need 0 <= m <= {coeffs.m}, got {m}")
    p = coeffs.p
    dtype = complex if np.iscomplexobj(x) or isinstance(x, complex) else float
    r_prev = np.zeros((p, p), dtype=dtype)
    r_cur = np.eye(p, dtype=dtype)
    eye = np.eye(p)
    for j in range(m):
        rhs = (x * eye - coeffs.B[j]) @ r_cur
        if j > 0:
            rhs -= coeffs.A[j - 1].T @ r_prev
        try:
            r_next = np.linalg.solve(coeffs.A[j], rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"A_{j + 1} is singular during eval_R: {exc}") from exc
        r_prev, r_cur = r_cur, r_next
    return r_cur


def cheb_T(a: np.ndarray, b: np.ndarray, n: int, t: float) -> np.ndarray:
    """Matrix Chebyshev polynomial of the first kind, T_n at t.

    T_0 = I; the first two steps carry the sqrt(2) modification:
        t T_0 = sqrt(2) A T_1 + B T_0
        t T_1 = A T_2 + B T_1 + sqrt(2) A T_0
        t T_n = A T_{n+1} + B T_n + A T_{n-1},  n >= 2.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}")
    p = a.shape[0]
    eye = np.eye(p)
    t0 = eye.copy()
    if n == 0:
        return t0
    t1 = _solve_stage(a, (t * eye - b) @ t0, 1) / math.sqrt(2.0)
    if n == 1:
        return t1
    t2 = _solve_stage(a, (t * eye - b) @ t1 - math.sqrt(2.0) * (a @ t0), 2)
    prev, cur = t1, t2
    for stage in range(3, n + 1):
        prev, cur = cur, _solve_stage(a, (t * eye - b) @ cur - a @ prev, stage)
    return cur


def cheb_U(a: np.ndarray, b: np.ndarray, n: int, t: float) -> np.ndarray:
    """Matrix Chebyshev polynomial of the second kind, U_n at t.

    U_{-1} = 0, U_0 = I, and t U_n = A^T U_{n+1} + B U_n + A U_{n-1}.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}")
    p = a.shape[0]
    eye = np.eye(p)
    prev = np.zeros((p, p))
    cur = eye.copy()
    for stage in range(1, n + 1):
        prev, cur = cur, _solve_stage(a.T, (t * eye - b) @ cur - a @ prev, stage)
    return cur


def _solve_stage(a: np.ndarray, rhs: np.ndarray, stage: int) -> np.ndarray:
    try:
        return np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular coefficient matrix at stage {stage}") from exc


def jacobi_matrix(coeffs: RecurrenceCoeffs, m: int) -> SymmetricBanded:
    """Block tridiagonal matrix with diagonal B_0..B_{m-1}, coupling A_1..A_{m-1}."""
    if not 1 <= m <= coeffs.m:
        raise ValidationError(f"need 1 <= m <= {coeffs.m}, got {m}")
    p = coeffs.p
    dim = m * p
    out = SymmetricBanded.zeros(dim, min(2 * p - 1, dim - 1))
    for i in range(m):
        blk = coeffs.B[i]
        for q in range(p):
            out.bands[0, i * p + q] = blk[q, q]
            for l in range(q + 1, p):
                out.bands[l - q, i * p + q] = blk[q, l]
    for i in range(1, m):
        blk = coeffs.A[i - 1]
        row_off, col_off = (i - 1) * p, i * p
        for q in range(p):
            for l in range(p):
                r, c = row_off + q, col_off + l
                out.bands[c - r, r] = blk[q, l]
    return out


def roots(coeffs: RecurrenceCoeffs, m: int) -> np.ndarray:
    """The m*p roots of det R_m, ascending, with multiplicity.

    Computed as the spectrum of the block Jacobi matrix; coincident
    eigenvalues realize root multiplicities with uniform weight 1/(m*p).
    """
    return eigh_banded(jacobi_matrix(coeffs, m))


def markov_bound_check(
    coeffs: RecurrenceCoeffs,
    n: int,
    z: complex,
    v: np.ndarray,
    m_bound: float,
) -> MarkovBound:
    """Evaluate |v^T R_n(z) R_{n+1}(z)^{-1} A_{n+1}^{-1} v| and its bounds.

    The caller supplies m_bound = M such that all roots of R_{n+1} lie in
    [-M, M] and z outside that interval.  The upper bound v^T v / dist(z, [-M, M])
    always applies; the strict lower bound v^T v / (2|z|) applies when |z| > M.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v != 0):
        raise ValidationError("v must be nonzero")
    if n + 1 > coeffs.m:
        raise ValidationError(f"need n + 1 <= {coeffs.m}, got n={n}")
    z = complex(z)
    dist = _dist_to_interval(z, m_bound)
    if dist <= 0:
        raise ValidationError(f"z={z} must lie outside [-{m_bound}, {m_bound}]")
    r_n = eval_R(coeffs, n, z)
    r_n1 = eval_R(coeffs, n + 1, z)
    try:
        y = np.linalg.solve(r_n1, np.linalg.solve(coeffs.A[n], v).astype(complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"R_{n + 1}(z) is singular at z={z}") from exc
    lhs = float(abs(v @ (r_n @ y)))
    vtv = float(v @ v)
    lower_applicable = bool(abs(z) > m_bound)
    lower = vtv / (2.0 * abs(z)) if lower_applicable else math.nan
    return MarkovBound(
        lhs=lhs,
        upper=vtv / dist,
        lower_applicable=lower_applicable,
        lower=lower,
    )


def _dist_to_interval(z: complex, m_bound: float) -> float:
    if abs(z.real) <= m_bound:
        return abs(z.imag)
    return math.hypot(abs(z.real) - m_bound, z.imag)

"""Limiting spectral density of the scaled ensemble, evaluated through the
eigenvalue curves of the matrix pencil behind the Chebyshev matrix measure,
plus independent closed-form oracles for p = 1 and p = 2.

The coefficient family is sqrt(s*p)-homogeneous: A(s) = sqrt(s*p) * A0 and
B(s) = sqrt(s*p) * B0, with A0, B0 built from the gamma weights.  For fixed
(s, t) the density integrand is

    sum_j  w_j / (pi * sqrt(4 - lambda_j^2))   over  |lambda_j| < 2,

where lambda_j are the eigenvalues of W(t) = A^{-1/2} (B - t I) A^{-1/2}
(real symmetric and similar to the defining pencil) and w_j = u_j^T A^{-1} u_j
for the unit eigenvectors u_j.  By first-order perturbation, dlambda_j/dt =
-w_j, so every curve is strictly decreasing in t and the weights double as
exact derivatives, which avoids curve tracking entirely.

The s-integral runs over (0, 1/p].  A u = sqrt(s) substitution removes the
1/sqrt(s) divergence of the weights at s -> 0, and the square-root kinks where
some lambda_j crosses +-2 are located by a scan-and-bisect pass and handed to
the adaptive quadrature as breakpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .ensemble import GammaWeights
from .errors import NotPositiveDefiniteError, NumericalError, ValidationError
from .linalg import eigh_dense, log_abs_det, require_symmetric, spd_inv_sqrt

_KINK_SCAN_POINTS = 129


class LambdaPoint(NamedTuple):
    """One eigenvalue curve sample: the value and its derivative weight."""

    value: float
    weight: float


@dataclass
class SpectralDensity:
    """Tabulated limit density on an ascending grid with its CDF."""

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    p: int | None = None
    gamma: tuple[float, ...] | None = None
    quad_tol: float | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        self.cdf = np.asarray(self.cdf, dtype=float)
        if not (len(self.grid) == len(self.density) == len(self.cdf)):
            raise ValidationError("grid, density and cdf lengths differ")
        if np.any(np.diff(self.grid) <= 0):
            raise ValidationError("grid must be strictly ascending")
        if np.any(self.density < 0):
            raise ValidationError("density must be nonnegative")
        if np.any(np.diff(self.cdf) < 0):
            raise ValidationError("cdf must be nondecreasing")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def normalized(self) -> bool:
        return abs(float(self.cdf[-1]) - 1.0) <= 1e-9


@dataclass
class LimitModel:
    """The s-independent factors A0, B0 of the homogeneous coefficient family.

    A0 has entries sqrt(gamma_{p-|i-j|} / 2); B0 has zero diagonal and
    entries sqrt(gamma_{|i-j|} / 2).  A0 must be invertible; density
    evaluation additionally requires it to be positive definite.
    """

    p: int
    gamma: tuple[float, ...]
    A0: np.ndarray
    B0: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.A0 = require_symmetric(self.A0)
        self.B0 = require_symmetric(self.B0)
        self.gamma = tuple(float(g) for g in self.gamma)
        if self.A0.shape != (self.p, self.p) or self.B0.shape != (self.p, self.p):
            raise ValidationError("A0 and B0 must be p x p")
        sign, _ = log_abs_det(self.A0)
        if sign == 0:
            raise ValidationError(
                "A0 is singular for these gamma weights; the limit law is not defined"
            )

    @classmethod
    def from_gamma(cls, w: GammaWeights) -> "LimitModel":
        i, j = np.indices((w.p, w.p))
        gamma = np.asarray(w.gamma)
        a0 = np.sqrt(gamma[w.p - np.abs(i - j) - 1] / 2.0)
        off = np.abs(i - j)
        b0 = np.sqrt(gamma[np.where(off > 0, off - 1, 0)] / 2.0)
        b0[off == 0] = 0.0
        return cls(p=w.p, gamma=w.gamma, A0=a0, B0=b0)

    def _spd_parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(S0, A0inv, W0) with S0 = A0^{-1/2}; requires A0 positive definite."""
        if "spd" not in self._cache:
            try:
                s0 = spd_inv_sqrt(self.A0)
            except NotPositiveDefiniteError as exc:
                raise NotPositiveDefiniteError(
                    "density evaluation requires a positive definite A0 block "
                    f"(smallest eigenvalue {exc.min_eigenvalue:.6e}); invertible "
                    "but indefinite weight configurations are rejected",
                    min_eigenvalue=exc.min_eigenvalue,
                ) from exc
            self._cache["spd"] = (s0, s0 @ s0, s0 @ self.B0 @ s0)
        return self._cache["spd"]


def build_AB(model: LimitModel, s: float) -> tuple[np.ndarray, np.ndarray]:
    """The coefficient pair (A(s), B(s)) = sqrt(s*p) * (A0, B0)."""
    if s <= 0:
        raise ValidationError(f"s must be > 0, got {s}")
    factor = math.sqrt(s * model.p)
    return factor * model.A0, factor * model.B0


def lambda_and_weights(
    a: np.ndarray, b: np.ndarray, t: float, tol: float = 1e-12
) -> list[LambdaPoint]:
    """Eigenvalue curve samples of W(t) = A^{-1/2}(B - tI)A^{-1/2}, ascending.

    Each point carries weight u^T A^{-1} u = ||A^{-1/2} u||^2 for its unit
    eigenvector u, which equals -dlambda/dt.  A must be positive definite.
    """
    a = require_symmetric(a)
    b = require_symmetric(b)
    s_half = spd_inv_sqrt(a, tol=tol)
    w_mat = s_half @ (b - t * np.eye(a.shape[0])) @ s_half
    values, vectors = eigh_dense((w_mat + w_mat.T) / 2.0)
    weights = np.sum((s_half @ vectors) ** 2, axis=0)
    return [LambdaPoint(float(v), float(wt)) for v, wt in zip(values, weights)]


def trace_density(a: np.ndarray, b: np.ndarray, t: float) -> float:
    """Density of the Chebyshev-type matrix measure trace at t.

    Sum of weight / (pi * sqrt(4 - lambda^2)) over curves with |lambda| < 2;
    zero when no curve is inside (-2, 2).
    """
    total = 0.0
    for lam, weight in lambda_and_weights(a, b, t):
        if abs(lam) < 2.0:
            total += weight / (math.pi * math.sqrt(4.0 - lam * lam))
    return total


class _TraceIntegrand:
    """Integrand of the s-integral for one fixed t, in u = sqrt(s) variables.

    Uses the homogeneous structure: W(s, t) = W0 - (t / sqrt(s*p)) * A0inv and
    A(s)^{-1} = A0inv / sqrt(s*p), so each evaluation costs one small eigh.
    """

    def __init__(self, model: LimitModel, t: float):
        self.p = model.p
        self.t = t
        _, self.a0inv, self.w0 = model._spd_parts()
        self.u_max = math.sqrt(1.0 / model.p)

    def _w_matrix(self, u: float) -> np.ndarray:
        return self.w0 - (self.t / (u * math.sqrt(self.p))) * self.a0inv

    def lambdas(self, u: float) -> np.ndarray:
        return np.linalg.eigvalsh(self._w_matrix(u))

    def __call__(self, u: float) -> float:
        if u <= 0.0:
            if self.t != 0.0:
                return 0.0
            # at t = 0 the curves are u-independent; take the limit value
            values, vectors = np.linalg.eigh(self.w0)
            weights = np.einsum("ij,ij->j", vectors, self.a0inv @ vectors)
            inside = np.abs(values) < 2.0
            return (2.0 / math.sqrt(self.p)) * float(
                np.sum(weights[inside] / (np.pi * np.sqrt(4.0 - values[inside] ** 2)))
            )
        values, vectors = np.linalg.eigh(self._w_matrix(u))
        inside = np.abs(values) < 2.0
        if not inside.any():
            return 0.0
        weights = np.einsum("ij,ij->j", vectors, self.a0inv @ vectors)
        weights = weights / (u * math.sqrt(self.p))
        # d s = 2u du
        return 2.0 * u * float(
            np.sum(weights[inside] / (np.pi * np.sqrt(4.0 - values[inside] ** 2)))
        )

    def crossing_points(self) -> list[float]:
        """u-locations where some eigenvalue curve crosses +-2.

        Each sorted curve is monotone in u (the shift -t/(u sqrt(p)) * A0inv
        is Loewner-monotone in u for fixed t), so every curve crosses each
        level at most once and a sign scan cannot miss a crossing.  Exact
        hits at scan points are kept as crossings directly.
        """
        us = np.linspace(0.0, self.u_max, _KINK_SCAN_POINTS)[1:]
        stack = np.stack([self._w_matrix(u) for u in us])
        lams = np.linalg.eigvalsh(stack)
        points: set[float] = set()
        for j in range(self.p):
            for level in (-2.0, 2.0):
                f = lams[:, j] - level
                for k in np.nonzero(f == 0.0)[0]:
                    points.add(float(us[k]))
                signs = np.sign(f)
                hits = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
                for k in hits:
                    root = brentq(
                        lambda u: self.lambdas(u)[j] - level,
                        us[k],
                        us[k + 1],
                        xtol=1e-13,
                    )
                    points.add(float(root))
        return sorted(points)


def limit_density(model: LimitModel, t: float, quad_tol: float = 1e-8) -> float:
    """Limit density f(t): the s-integral of the trace density over (0, 1/p].

    Integrates in u = sqrt(s) panel by panel between located curve crossings.
    Each panel is mapped through u = a + (b - a) sin^2(theta), which cancels
    the inverse-square-root singularities the integrand has where a curve
    meets +-2, so the adaptive rule only ever sees a smooth integrand.
    Absolute tolerance quad_tol.
    """
    if quad_tol <= 0:
        raise ValidationError("quad_tol must be positive")
    integrand = _TraceIntegrand(model, float(t))
    edges = [0.0, *integrand.crossing_points(), integrand.u_max]
    panel_tol = quad_tol / max(1, len(edges) - 1)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            width = b - a
            if width < 1e-14:
                continue

            def mapped(theta: float, a: float = a, width: float = width) -> float:
                sin_t = math.sin(theta)
                return integrand(a + width * sin_t * sin_t) * width * math.sin(2.0 * theta)

            value, _ = quad(mapped, 0.0, math.pi / 2.0, epsabs=panel_tol, epsrel=0.0, limit=200)
            total += value
    return max(0.0, float(total))


def semicircle_density(gamma1: float, x: float) -> float:
    """Closed-form p = 1 limit density sqrt(2*gamma1 - x^2) / (pi * gamma1)."""
    if gamma1 <= 0:
        raise ValidationError(f"gamma1 must be > 0, got {gamma1}")
    radicand = 2.0 * gamma1 - x * x
    if radicand <= 0:
        return 0.0
    return math.sqrt(radicand) / (math.pi * gamma1)


def arcsine_mixture_density(
    gamma1: float, gamma2: float, x: float, quad_tol: float = 1e-10
) -> float:
    """Closed-form p = 2 limit density: a two-branch arcsine mixture.

    Branch j integrates 1 / (pi * sqrt(4 a_j^2 s - (x - b_j sqrt(s))^2)) over
    s in (0, 1/2] wherever the radicand is positive, with
    a_1 = sqrt(gamma2) + sqrt(gamma1), a_2 = sqrt(gamma2) - sqrt(gamma1),
    b_1 = sqrt(gamma1), b_2 = -sqrt(gamma1).  This is the independent oracle
    for the generic p = 2 path.
    """
    if gamma1 <= 0 or gamma2 <= 0:
        raise ValidationError("gamma weights must be > 0")
    if gamma1 == gamma2:
        raise ValidationError(
            "gamma1 == gamma2 makes the coupling block singular; "
            "the p = 2 limit density is not defined"
        )
    if quad_tol <= 0:
        raise ValidationError("quad_tol must be positive")
    sg1, sg2 = math.sqrt(gamma1), math.sqrt(gamma2)
    u_max = math.sqrt(0.5)
    total = 0.0
    for a_j, b_j in ((sg2 + sg1, sg1), (sg2 - sg1, -sg1)):

        def branch(u: float, a_j: float = a_j, b_j: float = b_j) -> float:
            radicand = 4.0 * a_j * a_j * u * u - (x - b_j * u) ** 2
            if radicand <= 0:
                return 0.0
            return 2.0 * u / (math.pi * math.sqrt(radicand))

        # indicator boundaries solve x = (b_j +- 2 a_j) u exactly
        points = []
        for den in (b_j + 2.0 * a_j, b_j - 2.0 * a_j):
            if den != 0.0:
                u0 = x / den
                if 0.0 < u0 < u_max:
                    points.append(u0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            value, _ = quad(
                branch,
                0.0,
                u_max,
                points=sorted(points) or None,
                epsabs=quad_tol / 2.0,
                epsrel=0.0,
                limit=400,
            )
        total += value
    return max(0.0, float(total))


def support_bound(model: LimitModel) -> float:
    """Row-sum bound M* = ||B(1/p)||_inf + 2 ||A(1/p)||_inf on the support."""
    a, b = build_AB(model, 1.0 / model.p)
    return float(np.abs(b).sum(axis=1).max() + 2.0 * np.abs(a).sum(axis=1).max())


def tabulate_density(
    fn,
    bound: float,
    grid_size: int,
    p: int | None = None,
    gamma: tuple[float, ...] | None = None,
    quad_tol: float | None = None,
) -> SpectralDensity:
    """Tabulate a density function on grid_size + 1 points over [-bound, bound].

    The CDF is the cumulative trapezoid of the density; if its endpoint is
    within 1 percent of 1 the table is renormalized to end at exactly 1,
    otherwise the quadrature is considered failed and an error is raised.
    """
    if grid_size < 100:
        raise ValidationError(f"grid_size must be >= 100, got {grid_size}")
    grid = np.linspace(-bound, bound, grid_size + 1)
    density = np.array([fn(t) for t in grid])
    cdf = np.concatenate(
        [[0.0], np.cumsum((density[1:] + density[:-1]) / 2.0 * np.diff(grid))]
    )
    mass = float(cdf[-1])
    if abs(mass - 1.0) > 0.01:
        raise NumericalError(
            f"density mass {mass:.6f} is off by more than 1% from 1; "
            "quadrature failure for this weight configuration"
        )
    return SpectralDensity(
        grid=grid,
        density=density / mass,
        cdf=cdf / mass,
        p=p,
        gamma=gamma,
        quad_tol=quad_tol,
    )


def density_grid(model: LimitModel, grid_size: int, quad_tol: float = 1e-8) -> SpectralDensity:
    """Tabulate the limit density on grid_size + 1 points spanning [-M*, M*]."""
    return tabulate_density(
        lambda t: limit_density(model, t, quad_tol),
        support_bound(model),
        grid_size,
        p=model.p,
        gamma=model.gamma,
        quad_tol=quad_tol,
    )

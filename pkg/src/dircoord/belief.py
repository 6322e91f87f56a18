"""Gaussian beliefs in Cartesian and directional coordinates.

The conversion from a Cartesian Gaussian to a directional one pushes sigma
points through the coordinate map and rebuilds the covariance from the
resulting error coordinates; the nominal point is the converted mean.  For
6-state beliefs the velocity block is Cartesian in both parameterizations and
passes through unchanged, which preserves position-velocity cross terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import coords, so3
from .coords import DirectionalCoord
from .errors import MeanAtOriginError, NotPsdError

SIGMA_SCHEMES = ("cubature", "unscented")


@dataclass
class CartGaussian:
    """Gaussian over Cartesian position (n=3) or position+velocity (n=6)."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass
class DirGaussian:
    """Gaussian over directional error coordinates around a nominal point.

    The covariance is over [d_rho, d_phi] (n=3) or [d_rho, d_phi, d_v] (n=6);
    ``velocity`` holds the Cartesian nominal velocity for the 6-state case.
    """

    nominal: DirectionalCoord
    cov: np.ndarray
    velocity: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.cov.shape[0]


@dataclass
class SigmaPointSet:
    points: np.ndarray  # (count, n)
    weights: np.ndarray  # (count,)


def symmetrize(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + p.T)


def chol_psd(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor with a jitter retry for borderline-PSD inputs.

    A zero matrix factors to zero.  Otherwise one retry adds
    1e-12 * trace/n on the diagonal before giving up.

    Raises:
        NotPsdError: if the factorization still fails after jitter.
    """
    cov = symmetrize(np.asarray(cov, dtype=float))
    n = cov.shape[0]
    if not np.any(cov):
        return np.zeros((n, n))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * max(float(np.trace(cov)) / n, 1e-300)
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(n))
    except np.linalg.LinAlgError:
        raise NotPsdError("covariance is not positive semi-definite") from None


def sigma_points(g: CartGaussian, scheme: str = "cubature") -> SigmaPointSet:
    """Deterministic weighted samples matching mean and covariance of ``g``.

    "cubature" gives 2n points at mean +- sqrt(n) L_i with equal weights;
    "unscented" gives 2n+1 points with the classic kappa = 3 - n scaling.
    """
    if scheme not in SIGMA_SCHEMES:
        raise ValueError(f"unknown sigma scheme {scheme!r}")
    mean = np.asarray(g.mean, dtype=float)
    n = mean.shape[0]
    low = chol_psd(g.cov)
    if scheme == "cubature":
        spread = np.sqrt(n) * low.T  # rows are scaled factor columns
        points = np.vstack([mean + spread, mean - spread])
        weights = np.full(2 * n, 1.0 / (2 * n))
    else:
        kappa = 3.0 - n
        spread = np.sqrt(n + kappa) * low.T
        points = np.vstack([mean[None, :], mean + spread, mean - spread])
        weights = np.full(2 * n + 1, 1.0 / (2.0 * (n + kappa)))
        weights[0] = kappa / (n + kappa)
    return SigmaPointSet(points, weights)


def cart_to_dir(g: CartGaussian, scheme: str = "cubature") -> DirGaussian:
    """Convert a Cartesian Gaussian to directional coordinates via sigma points.

    The nominal point is the converted mean (not the weighted mean of the
    transformed points); the covariance is the weighted outer-product sum of
    the per-point error coordinates.

    Raises:
        MeanAtOriginError: if the mean position is within 1e-6 m of the origin.
        NearPiSingularityError: if a sigma point lands opposite the mean
            direction (propagated).
    """
    mean = np.asarray(g.mean, dtype=float)
    n = mean.shape[0]
    pos_mean = mean[:3]
    if np.linalg.norm(pos_mean) <= 1e-6:
        raise MeanAtOriginError("mean position too close to the origin")
    nominal = coords.from_cartesian(pos_mean)
    velocity = mean[3:].copy() if n == 6 else None

    pts = sigma_points(g, scheme)
    cov = np.zeros((n, n))
    for point, weight in zip(pts.points, pts.weights):
        dc = coords.from_cartesian(point[:3])
        err = coords.error_between(nominal, dc).as_vector()
        if n == 6:
            err = np.concatenate([err, point[3:] - velocity])
        cov += weight * np.outer(err, err)
    return DirGaussian(nominal, symmetrize(cov), velocity)


def dir_to_cart_gaussian(g: DirGaussian) -> CartGaussian:
    """Linearized conversion back to a Cartesian Gaussian.

    First-order map of the error coordinates through the coordinate relation;
    adequate in the small-spread regime and used for cross-filter comparisons.
    """
    n = g.dim
    jac = np.zeros((n, n))
    jac[:3, 0] = g.nominal.dcm[:, 0]
    jac[:3, 1:3] = g.nominal.rho * (g.nominal.dcm @ so3.odot(so3.E1))
    mean = coords.to_cartesian(g.nominal)
    if n == 6:
        jac[3:, 3:] = np.eye(3)
        mean = np.concatenate([mean, g.velocity])
    return CartGaussian(mean, symmetrize(jac @ g.cov @ jac.T))


def _direction_from_phi(d_phi: np.ndarray) -> np.ndarray:
    """Rows of exp_phi2(phi) @ e1 for a batch of tangent vectors (count, 2)."""
    angle = np.linalg.norm(d_phi, axis=1)
    small = angle < so3.SMALL_ANGLE
    safe = np.where(small, 1.0, angle)
    sinc = np.where(small, 1.0 - angle * angle / 6.0, np.sin(safe) / safe)
    return np.column_stack([np.cos(angle), sinc * d_phi[:, 1], -sinc * d_phi[:, 0]])


def dir_to_cart_samples(g: DirGaussian, count: int, seed) -> np.ndarray:
    """Draw Cartesian position samples from a directional Gaussian.

    Error coordinates are sampled from N(0, cov), composed onto the nominal
    point, and mapped to Cartesian.  Ranges that would go negative are clamped
    at zero (the perturbation API raises instead; sampling must not).
    Deterministic given ``seed``.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    low = chol_psd(g.cov)
    draws = rng.standard_normal((count, g.dim)) @ low.T
    rho = np.maximum(g.nominal.rho + draws[:, 0], 0.0)
    local = _direction_from_phi(draws[:, 1:3])
    return rho[:, None] * (local @ g.nominal.dcm.T)


def sample_cart(g: CartGaussian, count: int, seed) -> np.ndarray:
    """Draw samples from a Cartesian Gaussian; deterministic given ``seed``."""
    if count <= 0:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    low = chol_psd(g.cov)
    return g.mean + rng.standard_normal((count, g.dim)) @ low.T

"""Range and azimuth/elevation measurement models in both coordinate systems.

In directional coordinates the range model is linear and the direction-vector
model has a constant Jacobian; the Cartesian equivalents need state-dependent
linearization and explicit azimuth wrap handling, which is the asymmetry the
benchmark studies quantify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import so3
from .coords import DirectionalCoord
from .errors import GimbalPoleError, OriginSingularityError

# Projection dropping the radial component of a direction residual.
_PROJ = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

# Direction-residual Jacobian w.r.t. the tangent parameters: _PROJ @ odot(e1).
DIR_H_PHI = _PROJ @ so3.odot(so3.E1)


@dataclass
class RangeMeas:
    """Scalar distance to the origin, with variance (m^2)."""

    y: float
    var: float


@dataclass
class AeMeas:
    """Azimuth/elevation pair (rad) with 2x2 covariance."""

    alpha: float
    epsilon: float
    cov: np.ndarray


@dataclass
class DirVecMeas:
    """Unit-direction measurement with 3x3 noise covariance."""

    y: np.ndarray
    noise_cov: np.ndarray


@dataclass
class LinearizedMeas:
    """Innovation z with Jacobians: z ~ H dx + M nu, nu ~ N(0, noise_cov)."""

    z: np.ndarray
    H: np.ndarray
    M: np.ndarray
    noise_cov: np.ndarray


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = (-a + np.pi) % (2.0 * np.pi)
    return float(np.pi - w)


def ae_to_direction(alpha: float, epsilon: float) -> np.ndarray:
    """Unit direction vector for azimuth ``alpha`` and elevation ``epsilon``.

    Convention: [cos(eps)cos(alpha), cos(eps)sin(alpha), sin(eps)], which the
    tests pin to the composition of principal rotations about z and -y.
    """
    ce = np.cos(epsilon)
    return np.array([ce * np.cos(alpha), ce * np.sin(alpha), np.sin(epsilon)])


def direction_to_ae(g: np.ndarray) -> tuple[float, float]:
    """Azimuth/elevation of a unit direction vector.

    Raises:
        GimbalPoleError: if |g_z| >= 1 - 1e-12 (azimuth undefined).
    """
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.norm(g) - 1.0) > 1e-9:
        raise ValueError("direction vector must have unit norm")
    if abs(g[2]) >= 1.0 - 1e-12:
        raise GimbalPoleError("direction at elevation +/-pi/2")
    return float(np.arctan2(g[1], g[0])), float(np.arcsin(np.clip(g[2], -1.0, 1.0)))


def ae_direction_jacobian(alpha: float, epsilon: float) -> np.ndarray:
    """3x2 Jacobian of ae_to_direction w.r.t. (alpha, epsilon)."""
    sa, ca = np.sin(alpha), np.cos(alpha)
    se, ce = np.sin(epsilon), np.cos(epsilon)
    return np.array([
        [-ce * sa, -se * ca],
        [ce * ca, -se * sa],
        [0.0, ce],
    ])


def ae_cov_to_R(alpha: float, epsilon: float, cov: np.ndarray) -> np.ndarray:
    """Propagate an angle covariance onto the unit-vector measurement.

    Adds 1e-12 * I: the Jacobian is rank 2, and the projected innovation
    covariance must stay invertible.
    """
    jac = ae_direction_jacobian(alpha, epsilon)
    return jac @ np.asarray(cov, dtype=float) @ jac.T + 1e-12 * np.eye(3)


def ae_meas_to_dirvec(
    meas: AeMeas, lin_direction: np.ndarray | None = None
) -> DirVecMeas:
    """Convert raw angles to the unit-vector form used by the directional filter.

    ``lin_direction`` is where the noise covariance is linearized; a filter
    passes its predicted direction.  Linearizing at the measured angles
    instead leaves a near-null noise direction in the nominal tangent plane
    whenever the measurement lands far from the prediction, which blows up
    the gain under large angle noise.  Defaults to the measured direction
    (adequate only for small noise).
    """
    if lin_direction is None:
        alpha, epsilon = meas.alpha, meas.epsilon
    else:
        g = np.asarray(lin_direction, dtype=float)
        g = g / np.linalg.norm(g)
        try:
            alpha, epsilon = direction_to_ae(g)
        except GimbalPoleError:
            # Azimuth is arbitrary at the pole; any choice gives a valid
            # (zero-azimuth-variance) linearization there.
            alpha, epsilon = 0.0, float(np.copysign(0.5 * np.pi, g[2]))
    return DirVecMeas(
        ae_to_direction(meas.alpha, meas.epsilon),
        ae_cov_to_R(alpha, epsilon, meas.cov),
    )


def _pad_h(h_block: np.ndarray, state_dim: int) -> np.ndarray:
    rows, cols = h_block.shape
    h = np.zeros((rows, state_dim))
    h[:, :cols] = h_block
    return h


def range_innovation_dir(
    meas: RangeMeas, nominal: DirectionalCoord, state_dim: int = 3
) -> LinearizedMeas:
    """Range innovation in directional coordinates: linear, constant H."""
    h = _pad_h(np.array([[1.0, 0.0, 0.0]]), state_dim)
    return LinearizedMeas(
        z=np.array([meas.y - nominal.rho]),
        H=h,
        M=np.array([[1.0]]),
        noise_cov=np.array([[meas.var]]),
    )


def dirvec_innovation_dir(
    meas: DirVecMeas, nominal: DirectionalCoord, state_dim: int = 3
) -> LinearizedMeas:
    """Direction-vector innovation projected onto the 2-parameter tangent.

    Only two components are kept: the radial one would be a fictitious third
    measurement.  H is constant and independent of the nominal point.
    """
    z = _PROJ @ nominal.dcm.T @ (np.asarray(meas.y, dtype=float) - nominal.dcm[:, 0])
    h = np.zeros((2, state_dim))
    h[:, 1:3] = DIR_H_PHI
    return LinearizedMeas(
        z=z,
        H=h,
        M=_PROJ @ nominal.dcm.T,
        noise_cov=np.asarray(meas.noise_cov, dtype=float),
    )


def range_innovation_cart(
    meas: RangeMeas, r_hat: np.ndarray, state_dim: int = 3
) -> LinearizedMeas:
    """Range innovation for a Cartesian state; H is the norm gradient.

    Raises:
        OriginSingularityError: if the linearization point is within 1e-6 m
            of the origin.
    """
    r_hat = np.asarray(r_hat, dtype=float)
    norm = float(np.linalg.norm(r_hat))
    if norm <= 1e-6:
        raise OriginSingularityError("cannot linearize the norm at the origin")
    return LinearizedMeas(
        z=np.array([meas.y - norm]),
        H=_pad_h((r_hat / norm)[None, :], state_dim),
        M=np.array([[1.0]]),
        noise_cov=np.array([[meas.var]]),
    )


def cart_ae_jacobian(r_hat: np.ndarray) -> np.ndarray:
    """2x3 Jacobian of (azimuth, elevation) w.r.t. Cartesian position."""
    x, y, z = r_hat
    planar_sq = x * x + y * y
    norm_sq = planar_sq + z * z
    planar = np.sqrt(planar_sq)
    return np.array([
        [-y / planar_sq, x / planar_sq, 0.0],
        [-z * x / (norm_sq * planar), -z * y / (norm_sq * planar), planar / norm_sq],
    ])


def ae_innovation_cart(
    meas: AeMeas, r_hat: np.ndarray, state_dim: int = 3
) -> LinearizedMeas:
    """Azimuth/elevation innovation for a Cartesian state, with angle wrap.

    Raises:
        OriginSingularityError: linearization point at the origin.
        GimbalPoleError: linearization point on the vertical axis.
    """
    r_hat = np.asarray(r_hat, dtype=float)
    norm = float(np.linalg.norm(r_hat))
    if norm <= 1e-6:
        raise OriginSingularityError("cannot linearize angles at the origin")
    if np.hypot(r_hat[0], r_hat[1]) <= 1e-9 * norm:
        raise GimbalPoleError("linearization point on the vertical axis")
    alpha_hat = float(np.arctan2(r_hat[1], r_hat[0]))
    eps_hat = float(np.arcsin(np.clip(r_hat[2] / norm, -1.0, 1.0)))
    z = np.array([
        wrap_angle(meas.alpha - alpha_hat),
        wrap_angle(meas.epsilon - eps_hat),
    ])
    return LinearizedMeas(
        z=z,
        H=_pad_h(cart_ae_jacobian(r_hat), state_dim),
        M=np.eye(2),
        noise_cov=np.asarray(meas.cov, dtype=float),
    )


def simulate_range(r_true: np.ndarray, sigma: float, rng: np.random.Generator) -> RangeMeas:
    """Simulate a noisy range measurement; negative draws clamp at zero."""
    y = float(np.linalg.norm(r_true)) + sigma * float(rng.standard_normal())
    return RangeMeas(max(y, 0.0), sigma * sigma)


def fold_ae(alpha: float, epsilon: float) -> tuple[float, float]:
    """Canonicalize angles so elevation lies in [-pi/2, pi/2].

    An elevation past the pole is folded back with the azimuth shifted by pi;
    the encoded direction vector is unchanged.
    """
    epsilon = wrap_angle(epsilon)
    if epsilon > 0.5 * np.pi:
        epsilon = np.pi - epsilon
        alpha += np.pi
    elif epsilon < -0.5 * np.pi:
        epsilon = -np.pi - epsilon
        alpha += np.pi
    return wrap_angle(alpha), float(epsilon)


def simulate_ae(r_true: np.ndarray, sigma_ae: float, rng: np.random.Generator) -> AeMeas:
    """Simulate noisy azimuth/elevation of a position (independent noises).

    Large noise can push the raw elevation past +-pi/2; the pair is folded
    back to the canonical band without changing the measured direction.
    """
    r_true = np.asarray(r_true, dtype=float)
    alpha, epsilon = direction_to_ae(r_true / np.linalg.norm(r_true))
    noise = sigma_ae * rng.standard_normal(2)
    alpha, epsilon = fold_ae(alpha + noise[0], epsilon + noise[1])
    return AeMeas(alpha, epsilon, (sigma_ae * sigma_ae) * np.eye(2))

"""Small-matrix SO(3) algebra and the 2-parameter tangent used for directions.

A direction is represented by a full 3x3 rotation matrix ("DCM") acting on the
first basis vector.  Because rotating a vector about itself changes nothing,
only two tangent parameters matter for the direction; the wedge/vee pair below
maps those two parameters to and from so(3).
"""

from __future__ import annotations

import numpy as np

from .errors import NearPiSingularityError, NotInImageError

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

# Below this angle, sin/cos ratios are replaced by their leading series terms.
SMALL_ANGLE = 1e-7


def cross_matrix(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix M with M @ w == cross(v, w) for all w."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def wedge2(phi: np.ndarray) -> np.ndarray:
    """Map the 2-parameter tangent vector (phi1, phi2) into so(3).

    Equals cross_matrix([0, phi1, phi2]); the missing first slot is the
    rotation-about-the-direction freedom that a direction does not have.
    """
    phi = np.asarray(phi, dtype=float)
    return np.array([
        [0.0, -phi[1], phi[0]],
        [phi[1], 0.0, 0.0],
        [-phi[0], 0.0, 0.0],
    ])


def vee2(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Left inverse of wedge2: read (phi1, phi2) back from a wedge matrix.

    Raises:
        NotInImageError: if m is not skew-symmetric with a zero (2, 1) entry,
            i.e. not within ``tol`` of the wedge2 image.
    """
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m + m.T).max() > tol * scale or abs(m[2, 1]) > tol * scale:
        raise NotInImageError("matrix is not in the image of wedge2")
    return np.array([m[0, 2], m[1, 0]])


def odot(a: np.ndarray) -> np.ndarray:
    """3x2 matrix with wedge2(phi) @ a == odot(a) @ phi for all phi."""
    a = np.asarray(a, dtype=float)
    return np.array([
        [a[2], -a[1]],
        [0.0, a[0]],
        [-a[0], 0.0],
    ])


def exp_so3(theta: np.ndarray) -> np.ndarray:
    """Rotation matrix from a rotation vector (Rodrigues closed form)."""
    theta = np.asarray(theta, dtype=float)
    angle = float(np.linalg.norm(theta))
    k = cross_matrix(theta)
    if angle < SMALL_ANGLE:
        # 2nd-order series; residual is O(angle^3) ~ 1e-21.
        return np.eye(3) + k + 0.5 * (k @ k)
    axis_k = k / angle
    return (
        np.eye(3)
        + np.sin(angle) * axis_k
        + (1.0 - np.cos(angle)) * (axis_k @ axis_k)
    )


def exp_phi2(phi: np.ndarray) -> np.ndarray:
    """Rotation from 2-parameter tangent coordinates: exp_so3([0, phi1, phi2])."""
    phi = np.asarray(phi, dtype=float)
    return exp_so3(np.array([0.0, phi[0], phi[1]]))


def log_so3(c: np.ndarray) -> np.ndarray:
    """Rotation vector of c, with angle in [0, pi).

    Raises:
        NearPiSingularityError: if trace(c) <= -1 + 1e-6 (angle within about
            1e-3 rad of pi), where the axis becomes ambiguous.
    """
    c = np.asarray(c, dtype=float)
    tr = float(np.trace(c))
    if tr <= -1.0 + 1e-6:
        raise NearPiSingularityError("rotation angle too close to pi")
    cos_angle = np.clip(0.5 * (tr - 1.0), -1.0, 1.0)
    angle = float(np.arccos(cos_angle))
    w = 0.5 * np.array([c[2, 1] - c[1, 2], c[0, 2] - c[2, 0], c[1, 0] - c[0, 1]])
    if angle < SMALL_ANGLE:
        return w  # w = sin(angle)*axis ~ angle*axis here
    return (angle / np.sin(angle)) * w


def log_to_phi2(c_rel: np.ndarray) -> np.ndarray:
    """Project the rotation vector of a relative rotation onto (phi1, phi2).

    Drops the component about the first basis vector, which leaves the
    direction c_rel @ e1 unchanged; this is the unique projection consistent
    with wedge2.
    """
    theta = log_so3(c_rel)
    return theta[1:3].copy()


_AXIS_VECTORS = {"x": E1, "y": E2, "z": E3}


def principal_rotation(axis: str, angle: float) -> np.ndarray:
    """Rotation by ``angle`` about a coordinate axis ("x", "y" or "z").

    Active convention: principal_rotation("z", a) @ e1 = [cos a, sin a, 0].
    """
    try:
        unit = _AXIS_VECTORS[axis.lower()]
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None
    return exp_so3(angle * unit)


def is_rotation(m: np.ndarray, tol: float = 1e-9) -> bool:
    """True if m is orthonormal with determinant +1 within ``tol``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        return False
    ortho = np.linalg.norm(m.T @ m - np.eye(3))
    return ortho <= tol and abs(np.linalg.det(m) - 1.0) <= tol


def project_to_rotation(m: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (polar factor via SVD); idempotent.

    Used to re-orthonormalize after long chains of products keep accumulating
    floating-point drift.
    """
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt

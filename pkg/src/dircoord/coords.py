"""Directional coordinates: a position stored as range plus direction DCM.

The pair (rho, dcm) encodes the Cartesian position rho * dcm @ e1.  Compared
to spherical range/azimuth/elevation this has no pole singularity and no angle
wrap-around; the only degenerate point is the origin itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import so3
from .errors import NegativeRangeError


@dataclass(frozen=True)
class DirectionalCoord:
    """Range in meters plus a 3x3 rotation taking e1 to the unit direction."""

    rho: float
    dcm: np.ndarray


@dataclass(frozen=True)
class DirErrorVec:
    """Error coordinates: range offset (m) and 2-parameter tangent (rad)."""

    d_rho: float
    d_phi: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.array([self.d_rho, self.d_phi[0], self.d_phi[1]])

    @staticmethod
    def from_vector(v: np.ndarray) -> "DirErrorVec":
        v = np.asarray(v, dtype=float)
        return DirErrorVec(float(v[0]), v[1:3].copy())


def to_cartesian(dc: DirectionalCoord) -> np.ndarray:
    """Cartesian position rho * dcm @ e1."""
    return dc.rho * dc.dcm[:, 0].copy()


def from_cartesian(r: np.ndarray) -> DirectionalCoord:
    """Directional coordinates of a Cartesian position (total function).

    The rotation is built from the axis-angle pair rotating e1 onto r/|r|:
    axis = [0, -r_z, r_y] normalized, angle = arccos(r_x / |r|).  On the
    degenerate half-lines r_y = r_z = 0 the axis is undefined: positive r_x
    maps to the identity, negative r_x to a 180-degree rotation about z (the
    identity would not reproduce r there), and the origin maps to (0, I).
    """
    r = np.asarray(r, dtype=float)
    rho = float(np.linalg.norm(r))
    if rho == 0.0:
        return DirectionalCoord(0.0, np.eye(3))
    axis_raw = np.array([0.0, -r[2], r[1]])
    norm = float(np.linalg.norm(axis_raw))
    if norm == 0.0:
        if r[0] > 0.0:
            return DirectionalCoord(rho, np.eye(3))
        return DirectionalCoord(rho, so3.exp_so3(np.array([0.0, 0.0, np.pi])))
    angle = float(np.arccos(np.clip(r[0] / rho, -1.0, 1.0)))
    return DirectionalCoord(rho, so3.exp_so3(angle * axis_raw / norm))


def perturb(nominal: DirectionalCoord, err: DirErrorVec) -> DirectionalCoord:
    """Compose a nominal point with error coordinates.

    Range adds, the DCM is right-multiplied by the wedge exponential.

    Raises:
        NegativeRangeError: if the perturbed range would be negative.
    """
    rho = nominal.rho + err.d_rho
    if rho < 0.0:
        raise NegativeRangeError(f"perturbed range is negative: {rho:.3g}")
    return DirectionalCoord(rho, nominal.dcm @ so3.exp_phi2(err.d_phi))


def error_between(nominal: DirectionalCoord, other: DirectionalCoord) -> DirErrorVec:
    """Error coordinates taking ``nominal`` to ``other`` (inverse of perturb).

    Raises:
        NearPiSingularityError: if the relative rotation angle is too close
            to pi (propagated from the rotation logarithm).
    """
    d_phi = so3.log_to_phi2(nominal.dcm.T @ other.dcm)
    return DirErrorVec(other.rho - nominal.rho, d_phi)

"""Directional-coordinate kinematics driven by Cartesian velocity/acceleration.

The full state is (rho, dcm, v) with v a Cartesian velocity.  Range and
direction rates follow from the velocity through an always-invertible (for
rho > 0) mixing matrix; the only kinematic singularity is the origin itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import so3
from .errors import ZeroRangeError

# Range below which propagation clamps instead of crossing zero.
RHO_FLOOR = 1e-6

# Hard cap on integration substeps per call, to bound runtime near the floor.
MAX_SUBSTEPS = 1024

DISCRETIZATIONS = ("van_loan", "series2")


@dataclass
class DcState:
    """Filter state: range (m), direction DCM, Cartesian velocity (m/s)."""

    rho: float
    dcm: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ZeroRangeError(f"range must be positive, got {self.rho:.3g}")


@dataclass
class CartState:
    """Baseline state: Cartesian position and velocity."""

    pos: np.ndarray
    vel: np.ndarray


@dataclass
class LinearizedDynamics:
    """Continuous-time error dynamics d(dx)/dt = A dx + L da.

    Error ordering is [d_rho, d_phi (2), d_v (3)]; the velocity rows of A are
    zero and L routes acceleration noise into the velocity block.
    """

    a_mat: np.ndarray  # (6, 6)
    l_mat: np.ndarray  # (6, 3)


@dataclass
class ClampCounter:
    """Monotone counter of range-floor clamps, exposed to the harness."""

    count: int = 0


def s_matrix(rho: float, dcm: np.ndarray) -> np.ndarray:
    """3x3 map from (range rate, direction rates) to Cartesian velocity."""
    return dcm @ np.column_stack([so3.E1, rho * so3.odot(so3.E1)])


def s_inverse(rho: float, dcm: np.ndarray) -> np.ndarray:
    """Closed-form inverse of s_matrix.

    Raises:
        ZeroRangeError: if rho <= 0.
    """
    if rho <= 0.0:
        raise ZeroRangeError("rate mixing matrix is singular at zero range")
    rows = np.vstack([so3.E1[None, :], so3.odot(so3.E1).T])
    return np.diag([1.0, 1.0 / rho, 1.0 / rho]) @ rows @ dcm.T


def dc_rates(state: DcState) -> tuple[float, np.ndarray]:
    """Range rate (m/s) and 2-parameter direction rate (rad/s).

    Raises:
        ZeroRangeError: if the state range is not positive.
    """
    if state.rho <= 0.0:
        raise ZeroRangeError("rates undefined at zero range")
    v_local = state.dcm.T @ state.vel
    rho_dot = float(v_local[0])
    omega = np.array([-v_local[2], v_local[1]]) / state.rho
    return rho_dot, omega


def propagate(
    state: DcState,
    accel: np.ndarray,
    dt: float,
    clamp_counter: ClampCounter | None = None,
) -> DcState:
    """Forward-Euler propagation with the direction advanced by an exponential.

    The step is subdivided so each substep moves at most 1% of the current
    range, which bounds the Euler error when the range is small.  If the range
    would cross below RHO_FLOOR it is clamped there and the counter (when
    given) is incremented.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    accel = np.asarray(accel, dtype=float)
    speed = float(np.linalg.norm(state.vel))
    h_max = 0.01 * state.rho / max(speed, 1e-12)
    n_sub = min(max(int(np.ceil(dt / h_max)), 1), MAX_SUBSTEPS)
    h = dt / n_sub

    rho, dcm, vel = state.rho, state.dcm, state.vel.astype(float)
    for _ in range(n_sub):
        v_local = dcm.T @ vel
        rho_dot = v_local[0]
        omega = np.array([-v_local[2], v_local[1]]) / rho
        rho = rho + h * rho_dot
        if rho < RHO_FLOOR:
            rho = RHO_FLOOR
            if clamp_counter is not None:
                clamp_counter.count += 1
        dcm = dcm @ so3.exp_phi2(h * omega)
        vel = vel + h * accel
    return DcState(rho, dcm, vel)


def linearize(state: DcState) -> LinearizedDynamics:
    """Continuous-time error-state Jacobian about the current state.

    The direction-rate rows use the 3x2 tangent lift throughout so every
    block has consistent dimensions; the finite-difference suite is the
    arbiter for this form.

    Raises:
        ZeroRangeError: if the state range is not positive.
    """
    if state.rho <= 0.0:
        raise ZeroRangeError("cannot linearize at zero range")
    rho = state.rho
    v_local = state.dcm.T @ state.vel  # velocity in the direction frame
    odot_t = so3.odot(so3.E1).T  # (2, 3)
    odot_v = so3.odot(v_local)  # (3, 2)

    a = np.zeros((6, 6))
    a[0, 1:3] = -(odot_v.T @ so3.E1)
    a[0, 3:6] = state.dcm[:, 0]
    a[1:3, 0] = -(odot_t @ v_local) / (rho * rho)
    a[1:3, 1:3] = -(odot_t @ odot_v) / rho
    a[1:3, 3:6] = (odot_t @ state.dcm.T) / rho

    l_mat = np.zeros((6, 3))
    l_mat[3:6, :] = np.eye(3)
    return LinearizedDynamics(a, l_mat)


def cart_linearized() -> LinearizedDynamics:
    """Continuous-time double-integrator error dynamics for the baseline."""
    a = np.zeros((6, 6))
    a[0:3, 3:6] = np.eye(3)
    l_mat = np.zeros((6, 3))
    l_mat[3:6, :] = np.eye(3)
    return LinearizedDynamics(a, l_mat)


def discretize(
    lin: LinearizedDynamics,
    accel_psd: np.ndarray,
    dt: float,
    method: str = "van_loan",
) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold transition matrix and process noise covariance.

    "van_loan" uses the block matrix exponential; "series2" is a second-order
    truncated series, cheaper and adequate for small dt.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if method not in DISCRETIZATIONS:
        raise ValueError(f"unknown discretization {method!r}")
    a = lin.a_mat
    lql = lin.l_mat @ np.asarray(accel_psd, dtype=float) @ lin.l_mat.T
    n = a.shape[0]
    if method == "van_loan":
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = -a
        block[:n, n:] = lql
        block[n:, n:] = a.T
        exp_block = scipy.linalg.expm(block * dt)
        a_k = exp_block[n:, n:].T
        q_k = a_k @ exp_block[:n, n:]
    else:
        a_k = np.eye(n) + a * dt + 0.5 * (a @ a) * (dt * dt)
        # trapezoidal integral of A_k(s) LQL A_k(s)^T over the step
        q_k = 0.5 * dt * (lql + a_k @ lql @ a_k.T)
    return a_k, 0.5 * (q_k + q_k.T)


def propagate_cart(state: CartState, accel: np.ndarray, dt: float) -> CartState:
    """Forward-Euler double integrator (matches the directional scheme)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    accel = np.asarray(accel, dtype=float)
    return CartState(state.pos + dt * state.vel, state.vel + dt * accel)

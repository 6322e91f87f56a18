"""Smooth random benchmark trajectories with analytic derivatives.

Each axis is a sum of three sinusoids, so position, velocity, and
acceleration are exact closed forms of time.  Candidate paths are rejected
until the range stays inside [RHO_MIN, RHO_MAX] over the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .errors import RejectionLimitError

RHO_MIN = 1.0
RHO_MAX = 30.0
MAX_REJECTS = 100

_N_TERMS = 3


@dataclass
class SinusoidPath:
    """Analytic path r(t) = offset + sum_j amp_j * sin(omega_j t + phase_j)."""

    offset: np.ndarray  # (3,)
    amp: np.ndarray  # (3, terms)
    omega: np.ndarray  # (3, terms)
    phase: np.ndarray  # (3, terms)

    def pos(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        arg = self.omega[..., None] * t + self.phase[..., None]
        out = self.offset[:, None] + np.sum(self.amp[..., None] * np.sin(arg), axis=1)
        return out.T if t.ndim else out[:, 0]

    def vel(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        arg = self.omega[..., None] * t + self.phase[..., None]
        coeff = (self.amp * self.omega)[..., None]
        out = np.sum(coeff * np.cos(arg), axis=1)
        return out.T if t.ndim else out[:, 0]

    def acc(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        arg = self.omega[..., None] * t + self.phase[..., None]
        coeff = (self.amp * self.omega**2)[..., None]
        out = -np.sum(coeff * np.sin(arg), axis=1)
        return out.T if t.ndim else out[:, 0]


@dataclass
class Trajectory:
    """A path sampled on a uniform grid."""

    t: np.ndarray  # (steps,)
    pos: np.ndarray  # (steps, 3)
    vel: np.ndarray  # (steps, 3)
    acc: np.ndarray  # (steps, 3)


def sample_path(
    rng: np.random.Generator,
    duration: float,
    traj_scale: float = 1.0,
    rho_min: float = RHO_MIN,
    rho_max: float = RHO_MAX,
) -> SinusoidPath:
    """Draw a path whose range stays within [rho_min, rho_max].

    The starting point sits roughly 10 m from the origin; amplitudes scale
    with ``traj_scale``.

    Raises:
        RejectionLimitError: after MAX_REJECTS rejected candidates.
    """
    check_t = np.arange(0.0, duration + 0.01, 0.01)
    for _ in range(MAX_REJECTS):
        direction = rng.standard_normal(3)
        direction /= np.linalg.norm(direction)
        start = rng.uniform(8.0, 12.0) * direction
        amp = traj_scale * rng.uniform(0.5, 2.0, (3, _N_TERMS))
        omega = rng.uniform(0.2, 1.0, (3, _N_TERMS))
        phase = rng.uniform(0.0, 2.0 * np.pi, (3, _N_TERMS))
        offset = start - np.sum(amp * np.sin(phase), axis=1)
        path = SinusoidPath(offset, amp, omega, phase)
        radii = np.linalg.norm(path.pos(check_t), axis=1)
        if radii.min() >= rho_min and radii.max() <= rho_max:
            return path
    raise RejectionLimitError(
        f"no path satisfied the range bounds in {MAX_REJECTS} draws"
    )


def generate_trajectory(config: ScenarioConfig, seed) -> Trajectory:
    """Sample a random path on the prediction-rate grid; deterministic per seed."""
    rng = np.random.default_rng(seed)
    path = sample_path(rng, config.duration, config.traj_scale)
    n_steps = int(round(config.duration * config.prediction_rate))
    t = np.arange(n_steps + 1) / config.prediction_rate
    return Trajectory(t, path.pos(t), path.vel(t), path.acc(t))

"""The three estimators compared by the benchmark harness.

DirectionalKf tracks (range, direction DCM, velocity) with a multiplicative
correction on the DCM; CartesianEkf is the standard position/velocity EKF
baseline; ParticleFilter is the sampling oracle used to approximate the true
posterior.  Static single-correction variants of the two Kalman filters serve
the one-shot consistency study.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import belief, coords, kinematics, measurements, so3
from .belief import CartGaussian, DirGaussian
from .coords import DirectionalCoord
from .errors import SingularInnovationError
from .kinematics import CartState, ClampCounter, DcState
from .measurements import AeMeas, DirVecMeas, LinearizedMeas, RangeMeas

COND_LIMIT = 1e12


def kalman_gain(p: np.ndarray, lin: LinearizedMeas) -> tuple[np.ndarray, np.ndarray]:
    """Gain K and innovation covariance S = H P H^T + M R M^T.

    Raises:
        SingularInnovationError: if S is singular or has condition number
            above COND_LIMIT.
    """
    s = lin.H @ p @ lin.H.T + lin.M @ lin.noise_cov @ lin.M.T
    s = 0.5 * (s + s.T)
    if np.linalg.cond(s) > COND_LIMIT:
        raise SingularInnovationError("innovation covariance is ill-conditioned")
    try:
        factor = scipy.linalg.cho_factor(s)
    except np.linalg.LinAlgError:
        raise SingularInnovationError("innovation covariance is singular") from None
    gain = scipy.linalg.cho_solve(factor, lin.H @ p).T
    return gain, s


def joseph_update(
    p: np.ndarray, gain: np.ndarray, lin: LinearizedMeas
) -> np.ndarray:
    """Symmetric, PSD-preserving covariance update (valid for any gain)."""
    ikh = np.eye(p.shape[0]) - gain @ lin.H
    mrm = lin.M @ lin.noise_cov @ lin.M.T
    out = ikh @ p @ ikh.T + gain @ mrm @ gain.T
    return 0.5 * (out + out.T)


@dataclass
class DirectionalKf:
    """Error-state Kalman filter on (rho, dcm, v) with multiplicative DCM update.

    ``accel_psd`` is the continuous-time acceleration noise PSD (3x3);
    ``q_scale`` is the process-noise tuning multiplier.
    """

    state: DcState
    cov: np.ndarray
    accel_psd: np.ndarray
    q_scale: float = 1.0
    discretization: str = "van_loan"
    clamps: ClampCounter = field(default_factory=ClampCounter)

    @classmethod
    def from_cart_prior(
        cls,
        prior: CartGaussian,
        accel_psd: np.ndarray,
        q_scale: float = 1.0,
        scheme: str = "cubature",
        discretization: str = "van_loan",
    ) -> "DirectionalKf":
        """Initialize from a 6-state Cartesian prior via sigma-point conversion."""
        g = belief.cart_to_dir(prior, scheme)
        state = DcState(g.nominal.rho, g.nominal.dcm, g.velocity.copy())
        return cls(state, g.cov.copy(), np.asarray(accel_psd, dtype=float),
                   q_scale, discretization)

    def predict(self, accel: np.ndarray, dt: float) -> None:
        """Propagate state and covariance over one time step."""
        lin = kinematics.linearize(self.state)
        a_k, q_k = kinematics.discretize(
            lin, self.q_scale * self.accel_psd, dt, self.discretization
        )
        self.state = kinematics.propagate(self.state, accel, dt, self.clamps)
        cov = a_k @ self.cov @ a_k.T + q_k
        self.cov = 0.5 * (cov + cov.T)

    def correct(self, lin: LinearizedMeas) -> None:
        """Apply a linearized measurement: additive range/velocity update,
        multiplicative DCM update, Joseph-form covariance."""
        gain, _ = kalman_gain(self.cov, lin)
        dx = gain @ lin.z
        rho = self.state.rho + dx[0]
        if rho < kinematics.RHO_FLOOR:
            rho = kinematics.RHO_FLOOR
            self.clamps.count += 1
        dcm = so3.project_to_rotation(self.state.dcm @ so3.exp_phi2(dx[1:3]))
        self.state = DcState(rho, dcm, self.state.vel + dx[3:6])
        self.cov = joseph_update(self.cov, gain, lin)

    def correct_range(self, meas: RangeMeas) -> None:
        self.correct(measurements.range_innovation_dir(meas, self.nominal, 6))

    def correct_direction(self, meas: DirVecMeas) -> None:
        self.correct(measurements.dirvec_innovation_dir(meas, self.nominal, 6))

    def correct_ae(self, meas: AeMeas) -> None:
        # Noise linearized at the predicted direction, not the measured one.
        self.correct_direction(
            measurements.ae_meas_to_dirvec(meas, self.state.dcm[:, 0])
        )

    @property
    def nominal(self) -> DirectionalCoord:
        return DirectionalCoord(self.state.rho, self.state.dcm)

    def position(self) -> np.ndarray:
        return self.state.rho * self.state.dcm[:, 0]

    def velocity(self) -> np.ndarray:
        return self.state.vel.copy()


@dataclass
class CartesianEkf:
    """Standard EKF on Cartesian position/velocity (the baseline)."""

    state: CartState
    cov: np.ndarray
    accel_psd: np.ndarray
    q_scale: float = 1.0
    skipped: int = 0

    @classmethod
    def from_prior(
        cls, prior: CartGaussian, accel_psd: np.ndarray, q_scale: float = 1.0
    ) -> "CartesianEkf":
        state = CartState(prior.mean[:3].copy(), prior.mean[3:].copy())
        return cls(state, prior.cov.copy(), np.asarray(accel_psd, dtype=float), q_scale)

    def predict(self, accel: np.ndarray, dt: float) -> None:
        # Exact ZOH for the double integrator; mean uses the same Euler
        # scheme as the directional filter for a like-for-like comparison.
        self.state = kinematics.propagate_cart(self.state, accel, dt)
        a_k = np.eye(6)
        a_k[0:3, 3:6] = dt * np.eye(3)
        qc = self.q_scale * self.accel_psd
        q_k = np.zeros((6, 6))
        q_k[0:3, 0:3] = (dt**3 / 3.0) * qc
        q_k[0:3, 3:6] = (dt**2 / 2.0) * qc
        q_k[3:6, 0:3] = (dt**2 / 2.0) * qc
        q_k[3:6, 3:6] = dt * qc
        cov = a_k @ self.cov @ a_k.T + q_k
        self.cov = 0.5 * (cov + cov.T)

    def correct(self, lin: LinearizedMeas) -> None:
        gain, _ = kalman_gain(self.cov, lin)
        dx = gain @ lin.z
        self.state = CartState(self.state.pos + dx[:3], self.state.vel + dx[3:6])
        self.cov = joseph_update(self.cov, gain, lin)

    def correct_range(self, meas: RangeMeas) -> None:
        self.correct(measurements.range_innovation_cart(meas, self.state.pos, 6))

    def correct_ae(self, meas: AeMeas) -> None:
        self.correct(measurements.ae_innovation_cart(meas, self.state.pos, 6))

    def position(self) -> np.ndarray:
        return self.state.pos.copy()

    def velocity(self) -> np.ndarray:
        return self.state.vel.copy()


@dataclass
class ParticleFilter:
    """Bootstrap particle filter over Cartesian states (3 or 6 dimensional).

    Weighting uses log densities; ``degenerate_resets`` counts the times all
    likelihoods vanished and the weights were reset to uniform.
    """

    particles: np.ndarray  # (count, dim)
    weights: np.ndarray  # (count,)
    degenerate_resets: int = 0

    @classmethod
    def from_prior(
        cls, prior: CartGaussian, count: int, rng: np.random.Generator
    ) -> "ParticleFilter":
        low = belief.chol_psd(prior.cov)
        pts = prior.mean + rng.standard_normal((count, prior.dim)) @ low.T
        return cls(pts, np.full(count, 1.0 / count))

    @property
    def count(self) -> int:
        return self.particles.shape[0]

    def mean(self) -> np.ndarray:
        return np.average(self.particles, weights=self.weights, axis=0)

    def covariance(self) -> np.ndarray:
        d = self.particles - self.mean()
        return (self.weights[:, None] * d).T @ d

    def effective_count(self) -> float:
        return 1.0 / float(np.sum(self.weights**2))

    def _log_likelihood(self, meas) -> np.ndarray:
        pos = self.particles[:, :3]
        if isinstance(meas, RangeMeas):
            ranges = np.linalg.norm(pos, axis=1)
            if meas.var == 0.0:
                return np.where(ranges == meas.y, 0.0, -np.inf)
            return -0.5 * (meas.y - ranges) ** 2 / meas.var
        if isinstance(meas, AeMeas):
            alpha = np.arctan2(pos[:, 1], pos[:, 0])
            norms = np.linalg.norm(pos, axis=1)
            eps = np.arcsin(np.clip(pos[:, 2] / np.maximum(norms, 1e-300), -1, 1))
            d_alpha = np.pi - ((np.pi - (meas.alpha - alpha)) % (2 * np.pi))
            d_eps = meas.epsilon - eps
            var_a, var_e = meas.cov[0, 0], meas.cov[1, 1]
            return -0.5 * (d_alpha**2 / var_a + d_eps**2 / var_e)
        raise TypeError(f"unsupported measurement type {type(meas).__name__}")

    def step(
        self,
        accel: np.ndarray | None,
        dt: float,
        meas,
        rng: np.random.Generator,
        accel_std: float = 0.0,
    ) -> None:
        """Propagate with process noise, weight by likelihood, resample on low ESS."""
        if dt > 0.0 and self.particles.shape[1] == 6:
            noisy = np.asarray(accel, dtype=float) + accel_std * rng.standard_normal(
                self.particles.shape[:1] + (3,)
            )
            self.particles[:, :3] += dt * self.particles[:, 3:]
            self.particles[:, 3:] += dt * noisy
        if meas is not None:
            with np.errstate(divide="ignore"):
                logw = np.log(self.weights) + self._log_likelihood(meas)
            peak = np.max(logw)
            if not np.isfinite(peak):
                self.weights = np.full(self.count, 1.0 / self.count)
                self.degenerate_resets += 1
            else:
                w = np.exp(logw - peak)
                self.weights = w / np.sum(w)
        if self.effective_count() < 0.5 * self.count:
            self.resample(rng)

    def resample(self, rng: np.random.Generator) -> None:
        """Systematic resampling back to uniform weights."""
        positions = (np.arange(self.count) + rng.uniform()) / self.count
        idx = np.searchsorted(np.cumsum(self.weights), positions)
        idx = np.minimum(idx, self.count - 1)
        self.particles = self.particles[idx]
        self.weights = np.full(self.count, 1.0 / self.count)

    def sample_positions(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an unweighted position cloud according to the current weights."""
        idx = rng.choice(self.count, size=count, p=self.weights)
        return self.particles[idx, :3].copy()


def static_correct_dir(prior: DirGaussian, meas: RangeMeas) -> DirGaussian:
    """One range correction of a position-only directional Gaussian."""
    lin = measurements.range_innovation_dir(meas, prior.nominal, prior.dim)
    gain, _ = kalman_gain(prior.cov, lin)
    dx = gain @ lin.z
    rho = max(prior.nominal.rho + dx[0], kinematics.RHO_FLOOR)
    dcm = so3.project_to_rotation(prior.nominal.dcm @ so3.exp_phi2(dx[1:3]))
    return DirGaussian(
        DirectionalCoord(rho, dcm), joseph_update(prior.cov, gain, lin), None
    )


def static_correct_cart(prior: CartGaussian, meas: RangeMeas) -> CartGaussian:
    """One linearized range correction of a position-only Cartesian Gaussian."""
    lin = measurements.range_innovation_cart(meas, prior.mean, prior.dim)
    gain, _ = kalman_gain(prior.cov, lin)
    return CartGaussian(
        prior.mean + gain @ lin.z, joseph_update(prior.cov, gain, lin)
    )

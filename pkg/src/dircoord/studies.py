"""Monte Carlo studies: one-shot correction consistency and dynamic tracking.

Per-trial randomness is split into named, independently seeded streams so a
replayed trial can re-derive exactly the draws it needs (the prior) while
taking everything else from the log, and so both filters always see the same
measurement realizations.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import belief, coords, measurements, metrics
from .belief import CartGaussian
from .config import ScenarioConfig
from .errors import (
    GimbalPoleError,
    NearPiSingularityError,
    OriginSingularityError,
    SingularCovarianceError,
    SingularInnovationError,
)
from .filters import (
    CartesianEkf,
    DirectionalKf,
    ParticleFilter,
    static_correct_cart,
    static_correct_dir,
)
from .measurements import AeMeas, RangeMeas
from .metrics import AggregateSummary, FilterTrack, TrialRecord, aggregate_trials
from .trajectory import generate_trajectory

# Named sub-streams of the per-trial RNG split.
STREAM_TRAJ = 0
STREAM_PRIOR = 1
STREAM_MEAS = 2
STREAM_PF = 3
STREAM_TRUTH = 4
STREAM_KL = 5

# Prior randomization for the single-correction study.
SINGLE_RANGE_SPAN = (2.0, 20.0)
SINGLE_STD_SPAN = (0.5, 3.0)

_SKIPPABLE = (
    GimbalPoleError,
    OriginSingularityError,
    SingularInnovationError,
)


def trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Deterministic per-(seed, trial, stream) generator."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial, stream]))


def worker_count(config: ScenarioConfig) -> int:
    """Worker-pool size; the DIRCOORD_THREADS environment variable wins."""
    env = os.environ.get("DIRCOORD_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"DIRCOORD_THREADS must be an integer, got {env!r}")
        return max(value, 1)
    return max(config.workers, 1)


def _map_trials(fn, config: ScenarioConfig, n_trials: int) -> list:
    workers = worker_count(config)
    if workers <= 1 or n_trials <= 1:
        return [fn(config, i) for i in range(n_trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, [config] * n_trials, range(n_trials)))


# ---------------------------------------------------------------------------
# Dynamic study
# ---------------------------------------------------------------------------


@dataclass
class TrialInputs:
    """Everything one dynamic trial feeds to the filters.

    ``accel[k]`` drives the step t[k] -> t[k+1]; measurements attach to grid
    indices.  Range and angle measurements have independent schedules so
    partial (hardware-style) logs replay naturally; truth is optional.
    """

    t: np.ndarray  # (steps+1,)
    accel: np.ndarray  # (steps, 3)
    range_idx: np.ndarray  # (n_range,) int indices into t
    ranges: np.ndarray  # (n_range,)
    ae_idx: np.ndarray  # (n_ae,) int indices into t
    alphas: np.ndarray  # (n_ae,)
    epsilons: np.ndarray  # (n_ae,)
    truth_pos: np.ndarray | None = None  # (steps+1, 3)
    truth_vel: np.ndarray | None = None  # (steps+1, 3)


def derive_prior(
    config: ScenarioConfig, trial: int, pos0: np.ndarray, vel0: np.ndarray
) -> CartGaussian:
    """Randomized 6-state Cartesian prior around the true initial state."""
    rng = trial_rng(config.seed, trial, STREAM_PRIOR)
    mean = np.concatenate([
        pos0 + config.init_pos_std * rng.standard_normal(3),
        vel0 + config.init_vel_std * rng.standard_normal(3),
    ])
    cov = np.diag([config.init_pos_std**2] * 3 + [config.init_vel_std**2] * 3)
    return CartGaussian(mean, cov)


def build_trial_inputs(config: ScenarioConfig, trial: int) -> TrialInputs:
    """Simulate truth, accelerometer, and range/AE measurements for one trial."""
    traj = generate_trajectory(config, trial_rng(config.seed, trial, STREAM_TRAJ))
    rng = trial_rng(config.seed, trial, STREAM_MEAS)
    n_steps = traj.t.shape[0] - 1
    accel = traj.acc[:-1] + config.accel_std * rng.standard_normal((n_steps, 3))

    tick = config.steps_per_measurement()
    meas_idx = np.arange(tick, n_steps + 1, tick)
    ranges, alphas, epsilons = [], [], []
    for k in meas_idx:
        r_true = traj.pos[k]
        ranges.append(measurements.simulate_range(r_true, config.range_std, rng).y)
        ae = measurements.simulate_ae(r_true, config.ae_std, rng)
        alphas.append(ae.alpha)
        epsilons.append(ae.epsilon)
    return TrialInputs(
        t=traj.t,
        accel=accel,
        range_idx=meas_idx.copy(),
        ranges=np.array(ranges),
        ae_idx=meas_idx.copy(),
        alphas=np.array(alphas),
        epsilons=np.array(epsilons),
        truth_pos=traj.pos,
        truth_vel=traj.vel,
    )


def _dckf_error(kf: DirectionalKf, pos: np.ndarray, vel: np.ndarray) -> np.ndarray:
    truth_dc = coords.from_cartesian(pos)
    err = coords.error_between(kf.nominal, truth_dc).as_vector()
    return np.concatenate([err, vel - kf.state.vel])


def _ekf_error(kf: CartesianEkf, pos: np.ndarray, vel: np.ndarray) -> np.ndarray:
    return np.concatenate([pos - kf.state.pos, vel - kf.state.vel])


class _Tracker:
    """Accumulates one FilterTrack while a filter runs over a trial."""

    def __init__(self, name: str, steps: int):
        self.name = name
        self.est_pos = np.zeros((steps, 3))
        self.est_vel = np.zeros((steps, 3))
        self.cov_diag = np.zeros((steps, 6))
        self.nees = np.zeros(steps)
        self.mahal = np.zeros(steps)
        self.err_pos = np.zeros(steps)
        self.err_vel = np.zeros(steps)
        self.err_total = np.zeros(steps)

    def record(self, idx: int, kf, pos, vel) -> None:
        self.est_pos[idx] = kf.position()
        self.est_vel[idx] = kf.velocity()
        self.cov_diag[idx] = np.diag(kf.cov)
        if pos is None:
            self.nees[idx] = np.nan
            self.mahal[idx] = np.nan
            self.err_pos[idx] = np.nan
            self.err_vel[idx] = np.nan
            self.err_total[idx] = np.nan
            return
        try:
            if isinstance(kf, DirectionalKf):
                err = _dckf_error(kf, pos, vel)
            else:
                err = _ekf_error(kf, pos, vel)
            value = metrics.nees(err, kf.cov)
        except (NearPiSingularityError, SingularCovarianceError):
            value = np.inf
        self.nees[idx] = value
        self.mahal[idx] = np.sqrt(value)
        self.err_pos[idx] = np.linalg.norm(pos - self.est_pos[idx])
        self.err_vel[idx] = np.linalg.norm(vel - self.est_vel[idx])
        self.err_total[idx] = float(np.hypot(self.err_pos[idx], self.err_vel[idx]))

    def finish(self, skipped: int, clamps: int) -> FilterTrack:
        return FilterTrack(
            name=self.name,
            est_pos=self.est_pos,
            est_vel=self.est_vel,
            cov_diag=self.cov_diag,
            nees=self.nees,
            mahalanobis=self.mahal,
            err_pos=self.err_pos,
            err_vel=self.err_vel,
            err_total=self.err_total,
            skipped_corrections=skipped,
            range_clamps=clamps,
        )


def run_filters(
    inputs: TrialInputs, prior: CartGaussian, config: ScenarioConfig, trial: int = 0
) -> TrialRecord:
    """Drive the enabled filters over one trial's inputs.

    Range is applied before azimuth/elevation when both arrive on a tick.
    Corrections that hit a Cartesian singularity are skipped and counted;
    the directional filter has no such failure modes.
    """
    steps = inputs.t.shape[0]
    accel_psd = config.accel_psd()
    range_var = config.range_std**2
    ae_cov = (config.ae_std**2) * np.eye(2)

    dckf = ekf = None
    trackers: dict[str, _Tracker] = {}
    skipped = {"dckf": 0, "ekf": 0}
    if config.run_dckf:
        dckf = DirectionalKf.from_cart_prior(
            prior, accel_psd, config.dckf_q_scale,
            config.sigma_scheme, config.discretization,
        )
        trackers["dckf"] = _Tracker("dckf", steps)
    if config.run_ekf:
        ekf = CartesianEkf.from_prior(prior, accel_psd, config.ekf_q_scale)
        trackers["ekf"] = _Tracker("ekf", steps)

    range_at = {int(k): i for i, k in enumerate(inputs.range_idx)}
    ae_at = {int(k): i for i, k in enumerate(inputs.ae_idx)}

    def record_all(idx: int) -> None:
        pos = inputs.truth_pos[idx] if inputs.truth_pos is not None else None
        vel = inputs.truth_vel[idx] if inputs.truth_vel is not None else None
        if dckf is not None:
            trackers["dckf"].record(idx, dckf, pos, vel)
        if ekf is not None:
            trackers["ekf"].record(idx, ekf, pos, vel)

    def try_correct(name: str, apply, meas) -> None:
        try:
            apply(meas)
        except _SKIPPABLE:
            skipped[name] += 1

    record_all(0)
    for k in range(steps - 1):
        dt = float(inputs.t[k + 1] - inputs.t[k])
        if dckf is not None:
            dckf.predict(inputs.accel[k], dt)
        if ekf is not None:
            ekf.predict(inputs.accel[k], dt)
        r_tick = range_at.get(k + 1)
        if r_tick is not None:
            range_meas = RangeMeas(float(inputs.ranges[r_tick]), range_var)
            if dckf is not None:
                try_correct("dckf", dckf.correct_range, range_meas)
            if ekf is not None:
                try_correct("ekf", ekf.correct_range, range_meas)
        a_tick = ae_at.get(k + 1)
        if a_tick is not None:
            ae_meas = AeMeas(
                float(inputs.alphas[a_tick]), float(inputs.epsilons[a_tick]), ae_cov
            )
            if dckf is not None:
                try_correct("dckf", dckf.correct_ae, ae_meas)
            if ekf is not None:
                try_correct("ekf", ekf.correct_ae, ae_meas)
        record_all(k + 1)

    tracks = {}
    if dckf is not None:
        tracks["dckf"] = trackers["dckf"].finish(skipped["dckf"], dckf.clamps.count)
    if ekf is not None:
        tracks["ekf"] = trackers["ekf"].finish(skipped["ekf"], 0)
    return TrialRecord(
        trial=trial,
        t=inputs.t,
        truth_pos=inputs.truth_pos,
        truth_vel=inputs.truth_vel,
        tracks=tracks,
    )


def run_dynamic_trial(config: ScenarioConfig, trial: int) -> tuple[TrialRecord, TrialInputs]:
    inputs = build_trial_inputs(config, trial)
    prior = derive_prior(config, trial, inputs.truth_pos[0], inputs.truth_vel[0])
    return run_filters(inputs, prior, config, trial), inputs


@dataclass
class DynamicResults:
    records: list[TrialRecord]
    inputs: list[TrialInputs]
    summary: AggregateSummary


def run_dynamic_study(config: ScenarioConfig) -> DynamicResults:
    """Run the configured number of independent tracking trials and aggregate."""
    config.validate()
    pairs = _map_trials(run_dynamic_trial, config, config.trials)
    records = [rec for rec, _ in pairs]
    inputs = [inp for _, inp in pairs]
    return DynamicResults(records, inputs, aggregate_trials(records))


# ---------------------------------------------------------------------------
# Single-correction study
# ---------------------------------------------------------------------------


@dataclass
class SingleCorrectionResults:
    """Per-trial consistency metrics for the one-shot range correction."""

    mahal_dckf: np.ndarray
    mahal_ekf: np.ndarray
    err_dckf: np.ndarray
    err_ekf: np.ndarray
    kl_dckf: np.ndarray  # D(filter posterior || particle cloud)
    kl_ekf: np.ndarray

    def medians(self) -> dict[str, float]:
        return {
            "mahal_dckf": float(np.median(self.mahal_dckf)),
            "mahal_ekf": float(np.median(self.mahal_ekf)),
            "err_dckf": float(np.median(self.err_dckf)),
            "err_ekf": float(np.median(self.err_ekf)),
            "kl_dckf": float(np.median(self.kl_dckf)),
            "kl_ekf": float(np.median(self.kl_ekf)),
        }


def random_prior(rng: np.random.Generator) -> CartGaussian:
    """Prior with uniform random direction, range, and random PSD covariance."""
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    mean = rng.uniform(*SINGLE_RANGE_SPAN) * direction
    basis, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    stds = rng.uniform(*SINGLE_STD_SPAN, 3)
    cov = basis @ np.diag(stds**2) @ basis.T
    return CartGaussian(mean, belief.symmetrize(cov))


def run_single_trial(
    config: ScenarioConfig, trial: int, truth_override: np.ndarray | None = None
) -> dict[str, float]:
    """One randomized prior, one range measurement, both static corrections,
    and divergences of each posterior from a particle-filter reference."""
    prior = random_prior(trial_rng(config.seed, trial, STREAM_PRIOR))
    rng_truth = trial_rng(config.seed, trial, STREAM_TRUTH)
    if truth_override is not None:
        truth = np.asarray(truth_override, dtype=float)
    else:
        truth = belief.sample_cart(prior, 1, rng_truth)[0]
    rng_meas = trial_rng(config.seed, trial, STREAM_MEAS)
    meas = measurements.simulate_range(truth, config.range_std, rng_meas)

    post_cart = static_correct_cart(prior, meas)
    prior_dir = belief.cart_to_dir(prior, config.sigma_scheme)
    post_dir = static_correct_dir(prior_dir, meas)

    err_cart = float(np.linalg.norm(truth - post_cart.mean))
    err_dir = float(np.linalg.norm(truth - coords.to_cartesian(post_dir.nominal)))
    mahal_cart = metrics.mahalanobis(truth - post_cart.mean, post_cart.cov)
    try:
        xi = coords.error_between(
            post_dir.nominal, coords.from_cartesian(truth)
        ).as_vector()
        mahal_dir = metrics.mahalanobis(xi, post_dir.cov)
    except NearPiSingularityError:
        mahal_dir = np.inf

    rng_pf = trial_rng(config.seed, trial, STREAM_PF)
    pf = ParticleFilter.from_prior(prior, config.pf_particles, rng_pf)
    pf.step(None, 0.0, meas, rng_pf)
    pf_cloud = pf.sample_positions(config.kl_samples, rng_pf)

    rng_kl = trial_rng(config.seed, trial, STREAM_KL)
    cloud_dir = belief.dir_to_cart_samples(post_dir, config.kl_samples, rng_kl)
    cloud_cart = belief.sample_cart(post_cart, config.kl_samples, rng_kl)
    return {
        "mahal_dckf": mahal_dir,
        "mahal_ekf": mahal_cart,
        "err_dckf": err_dir,
        "err_ekf": err_cart,
        "kl_dckf": metrics.kl_divergence_knn(cloud_dir, pf_cloud, config.kl_k),
        "kl_ekf": metrics.kl_divergence_knn(cloud_cart, pf_cloud, config.kl_k),
    }


def run_single_correction_study(config: ScenarioConfig) -> SingleCorrectionResults:
    config.validate()
    rows = _map_trials(run_single_trial, config, config.trials)
    return SingleCorrectionResults(
        mahal_dckf=np.array([r["mahal_dckf"] for r in rows]),
        mahal_ekf=np.array([r["mahal_ekf"] for r in rows]),
        err_dckf=np.array([r["err_dckf"] for r in rows]),
        err_ekf=np.array([r["err_ekf"] for r in rows]),
        kl_dckf=np.array([r["kl_dckf"] for r in rows]),
        kl_ekf=np.array([r["kl_ekf"] for r in rows]),
    )

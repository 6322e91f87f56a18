"""Scenario configuration: defaults, INI-style file parsing, and hashing.

The file format is flat ``key = value`` lines under two sections::

    [noise]
    range_std = 0.1        ; m
    ae_std = 0.8           ; rad
    accel_std = 0.1        ; m/s^2
    init_pos_std = 5.0     ; m
    init_vel_std = 3.0     ; m/s
    meas_frequency = 10.0  ; Hz

    [run]
    trials = 100
    duration = 60.0
    prediction_rate = 100.0
    seed = 0
    run_dckf = true
    run_ekf = true
    run_pf = false
    dckf_q_scale = 1.0
    ekf_q_scale = 1.0
    sigma_scheme = cubature
    discretization = van_loan
    pf_particles = 10000
    kl_samples = 5000
    kl_k = 5
    workers = 1
    trial_index = 0
    synthesize_ae = false
    traj_scale = 1.0

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

_NOISE_KEYS = {
    "range_std", "ae_std", "accel_std", "init_pos_std", "init_vel_std",
    "meas_frequency",
}
_RUN_FLOAT_KEYS = {
    "duration", "prediction_rate", "dckf_q_scale", "ekf_q_scale", "traj_scale",
}
_RUN_INT_KEYS = {"trials", "seed", "pf_particles", "kl_samples", "kl_k",
                 "workers", "trial_index"}
_RUN_BOOL_KEYS = {"run_dckf", "run_ekf", "run_pf", "synthesize_ae"}
_RUN_STR_KEYS = {"sigma_scheme", "discretization"}


@dataclass
class ScenarioConfig:
    """All knobs for the simulation studies; defaults match the benchmark setup."""

    range_std: float = 0.1
    ae_std: float = 0.8
    accel_std: float = 0.1
    init_pos_std: float = 5.0
    init_vel_std: float = 3.0
    meas_frequency: float = 10.0

    trials: int = 100
    duration: float = 60.0
    prediction_rate: float = 100.0
    seed: int = 0
    run_dckf: bool = True
    run_ekf: bool = True
    run_pf: bool = False
    dckf_q_scale: float = 1.0
    ekf_q_scale: float = 1.0
    sigma_scheme: str = "cubature"
    discretization: str = "van_loan"
    pf_particles: int = 10000
    kl_samples: int = 5000
    kl_k: int = 5
    workers: int = 1
    trial_index: int = 0
    synthesize_ae: bool = False
    traj_scale: float = 1.0

    def validate(self) -> None:
        for key in ("range_std", "ae_std", "accel_std", "init_pos_std",
                    "init_vel_std"):
            if getattr(self, key) < 0.0:
                raise ConfigError(f"{key} must be >= 0")
        for key in ("meas_frequency", "prediction_rate", "duration"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(f"{key} must be > 0")
        for key in ("trials", "pf_particles", "kl_samples", "kl_k", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1")
        if self.trial_index < 0:
            raise ConfigError("trial_index must be >= 0")
        if self.sigma_scheme not in ("cubature", "unscented"):
            raise ConfigError(f"unknown sigma_scheme {self.sigma_scheme!r}")
        if self.discretization not in ("van_loan", "series2"):
            raise ConfigError(f"unknown discretization {self.discretization!r}")
        if self.prediction_rate < self.meas_frequency:
            raise ConfigError("prediction_rate must be >= meas_frequency")

    def steps_per_measurement(self) -> int:
        ratio = self.prediction_rate / self.meas_frequency
        rounded = round(ratio)
        if abs(ratio - rounded) > 1e-9:
            raise ConfigError("prediction_rate must be a multiple of meas_frequency")
        return int(rounded)

    def accel_psd(self):
        import numpy as np

        return (self.accel_std**2) * np.eye(3)

    def canonical_text(self) -> str:
        fields = dataclasses.asdict(self)
        return "".join(f"{k}={fields[k]!r}\n" for k in sorted(fields))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse a scenario file; missing keys keep their defaults.

    Raises:
        ConfigError: on unreadable files, unknown sections/keys, bad values.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file: {exc}") from exc

    cfg = ScenarioConfig()
    for section in parser.sections():
        if section not in ("noise", "run"):
            raise ConfigError(f"unknown section [{section}]")
    try:
        if parser.has_section("noise"):
            for key in parser["noise"]:
                if key not in _NOISE_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [noise]")
                setattr(cfg, key, parser.getfloat("noise", key))
        if parser.has_section("run"):
            for key in parser["run"]:
                if key in _RUN_FLOAT_KEYS:
                    setattr(cfg, key, parser.getfloat("run", key))
                elif key in _RUN_INT_KEYS:
                    setattr(cfg, key, parser.getint("run", key))
                elif key in _RUN_BOOL_KEYS:
                    setattr(cfg, key, parser.getboolean("run", key))
                elif key in _RUN_STR_KEYS:
                    setattr(cfg, key, parser.get("run", key).strip())
                else:
                    raise ConfigError(f"unknown key {key!r} in [run]")
    except ValueError as exc:
        raise ConfigError(f"bad value in config: {exc}") from exc
    cfg.validate()
    return cfg


EXAMPLE_CONFIG = """\
; Scenario configuration. Values shown are the defaults.

[noise]
range_std = 0.1        ; m
ae_std = 0.8           ; rad, azimuth and elevation independently
accel_std = 0.1        ; m/s^2
init_pos_std = 5.0     ; m, initial position prior std per axis
init_vel_std = 3.0     ; m/s, initial velocity prior std per axis
meas_frequency = 10.0  ; Hz, range + AE measurement rate

[run]
trials = 100
duration = 60.0          ; s
prediction_rate = 100.0  ; Hz
seed = 0
run_dckf = true
run_ekf = true
run_pf = false
dckf_q_scale = 1.0       ; process-noise tuning multiplier
ekf_q_scale = 1.0
sigma_scheme = cubature  ; cubature | unscented
discretization = van_loan  ; van_loan | series2
pf_particles = 10000
kl_samples = 5000        ; cloud size for the divergence estimate
kl_k = 5                 ; neighbor order for the divergence estimate
workers = 1              ; overridden by DIRCOORD_THREADS
trial_index = 0          ; which trial a replay re-derives its prior for
synthesize_ae = false    ; replay: build AE measurements from truth columns
traj_scale = 1.0         ; trajectory amplitude multiplier
"""


def write_example_config(path: str | Path) -> None:
    Path(path).write_text(EXAMPLE_CONFIG, encoding="utf-8")

"""CSV log replay: drive the filters from recorded inputs.

Log format (UTF-8, LF, RFC-4180 quoting)::

    t,ax,ay,az,range,alpha,epsilon,rx,ry,rz,vx,vy,vz

One row per prediction step.  ``ax..az`` is the accelerometer sample driving
the step that starts at ``t`` (may be empty on the final row only).  Range
and angle fields are empty except on measurement rows; truth columns
``rx..vz`` are optional but must be all-present or all-absent per file.
Floats are written with ``repr`` so a round trip through the file is bitwise
exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import measurements
from .config import ScenarioConfig
from .errors import ConfigError, NonMonotoneTimeError, ParseError
from .metrics import TrialRecord
from .studies import (
    STREAM_MEAS,
    TrialInputs,
    derive_prior,
    run_filters,
    trial_rng,
)

HEADER = ["t", "ax", "ay", "az", "range", "alpha", "epsilon",
          "rx", "ry", "rz", "vx", "vy", "vz"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_replay_log(path: str | Path, inputs: TrialInputs) -> None:
    """Write one trial's inputs as a replay log."""
    n_steps = inputs.accel.shape[0]
    range_at = {int(k): i for i, k in enumerate(inputs.range_idx)}
    ae_at = {int(k): i for i, k in enumerate(inputs.ae_idx)}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for k, t_k in enumerate(inputs.t):
            row = [_fmt(t_k)]
            row += [_fmt(a) for a in inputs.accel[k]] if k < n_steps else ["", "", ""]
            r_i = range_at.get(k)
            row.append(_fmt(inputs.ranges[r_i]) if r_i is not None else "")
            a_i = ae_at.get(k)
            if a_i is not None:
                row += [_fmt(inputs.alphas[a_i]), _fmt(inputs.epsilons[a_i])]
            else:
                row += ["", ""]
            if inputs.truth_pos is not None:
                row += [_fmt(x) for x in inputs.truth_pos[k]]
                row += [_fmt(x) for x in inputs.truth_vel[k]]
            else:
                row += [""] * 6
            writer.writerow(row)


def _parse_float(field: str, name: str, line: int) -> float:
    try:
        return float(field)
    except ValueError:
        raise ParseError(f"bad {name} value {field!r}", line) from None


def read_replay_log(path: str | Path) -> TrialInputs:
    """Parse a replay log.

    Raises:
        ParseError: malformed rows (with the 1-based line number).
        NonMonotoneTimeError: timestamps not strictly increasing.
    """
    t, accel = [], []
    range_idx, ranges = [], []
    ae_idx, alphas, epsilons = [], [], []
    truth_pos, truth_vel = [], []
    has_truth: bool | None = None

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty log file", 1) from None
        if [h.strip() for h in header] != HEADER:
            raise ParseError(f"unexpected header {header!r}", 1)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(row)}", line)
            k = len(t)
            t.append(_parse_float(row[0], "t", line))
            acc_fields = [f.strip() for f in row[1:4]]
            if all(acc_fields):
                accel.append([_parse_float(f, "accel", line) for f in acc_fields])
            elif any(acc_fields):
                raise ParseError("accel must be all present or all empty", line)
            else:
                accel.append(None)
            if row[4].strip():
                range_idx.append(k)
                ranges.append(_parse_float(row[4], "range", line))
            ae_fields = [f.strip() for f in row[5:7]]
            if all(ae_fields):
                ae_idx.append(k)
                alphas.append(_parse_float(ae_fields[0], "alpha", line))
                epsilons.append(_parse_float(ae_fields[1], "epsilon", line))
            elif any(ae_fields):
                raise ParseError("alpha/epsilon must come as a pair", line)
            truth_fields = [f.strip() for f in row[7:13]]
            row_truth = all(truth_fields)
            if not row_truth and any(truth_fields):
                raise ParseError("truth columns must be all present or all empty", line)
            if has_truth is None:
                has_truth = row_truth
            elif has_truth != row_truth:
                raise ParseError("truth columns must be consistent across rows", line)
            if row_truth:
                vals = [_parse_float(f, "truth", line) for f in truth_fields]
                truth_pos.append(vals[:3])
                truth_vel.append(vals[3:])

    if len(t) < 2:
        raise ParseError("log needs at least two rows", len(t) + 1)
    t_arr = np.array(t)
    if np.any(np.diff(t_arr) <= 0.0):
        raise NonMonotoneTimeError("timestamps must be strictly increasing")
    if any(a is None for a in accel[:-1]):
        missing = next(i for i, a in enumerate(accel[:-1]) if a is None)
        raise ParseError("accel missing before the final row", missing + 2)
    return TrialInputs(
        t=t_arr,
        accel=np.array([a for a in accel[:-1]], dtype=float),
        range_idx=np.array(range_idx, dtype=int),
        ranges=np.array(ranges),
        ae_idx=np.array(ae_idx, dtype=int),
        alphas=np.array(alphas),
        epsilons=np.array(epsilons),
        truth_pos=np.array(truth_pos) if has_truth else None,
        truth_vel=np.array(truth_vel) if has_truth else None,
    )


def synthesize_ae(inputs: TrialInputs, config: ScenarioConfig) -> TrialInputs:
    """Fill in angle measurements from truth columns plus configured noise.

    Angles are generated at the range-measurement rows (or, if there are
    none, on the configured measurement-frequency grid).  Draws come from the
    replayed trial's measurement stream, so the result is deterministic.
    """
    if inputs.truth_pos is None:
        raise ConfigError("synthesize_ae requires truth columns in the log")
    rng = trial_rng(config.seed, config.trial_index, STREAM_MEAS)
    if inputs.range_idx.size:
        idx = inputs.range_idx.copy()
    else:
        tick = config.steps_per_measurement()
        idx = np.arange(tick, inputs.t.shape[0], tick)
    alphas, epsilons = [], []
    for k in idx:
        ae = measurements.simulate_ae(inputs.truth_pos[k], config.ae_std, rng)
        alphas.append(ae.alpha)
        epsilons.append(ae.epsilon)
    return TrialInputs(
        t=inputs.t,
        accel=inputs.accel,
        range_idx=inputs.range_idx,
        ranges=inputs.ranges,
        ae_idx=idx,
        alphas=np.array(alphas),
        epsilons=np.array(epsilons),
        truth_pos=inputs.truth_pos,
        truth_vel=inputs.truth_vel,
    )


def replay_prior(inputs: TrialInputs, config: ScenarioConfig):
    """Initial belief for a replayed log.

    With truth columns the prior is re-derived exactly as the simulation
    study derived it (same seed, same trial index).  Without truth, the first
    complete range + angle measurement seeds the position estimate.
    """
    if inputs.truth_pos is not None:
        return derive_prior(
            config, config.trial_index, inputs.truth_pos[0], inputs.truth_vel[0]
        )
    common = sorted(set(inputs.range_idx.tolist()) & set(inputs.ae_idx.tolist()))
    if not common:
        raise ConfigError(
            "replay without truth needs at least one row with range and angles"
        )
    k = common[0]
    r_i = int(np.nonzero(inputs.range_idx == k)[0][0])
    a_i = int(np.nonzero(inputs.ae_idx == k)[0][0])
    direction = measurements.ae_to_direction(inputs.alphas[a_i], inputs.epsilons[a_i])
    mean = np.concatenate([inputs.ranges[r_i] * direction, np.zeros(3)])
    cov = np.diag([config.init_pos_std**2] * 3 + [config.init_vel_std**2] * 3)
    from .belief import CartGaussian

    return CartGaussian(mean, cov)


@dataclass
class ReplayResults:
    record: TrialRecord
    rmse: dict[str, dict[str, float]]  # filter -> {"pos": ..., "vel": ...}


def run_replay(path: str | Path, config: ScenarioConfig) -> ReplayResults:
    """Replay a log through the enabled filters; RMSE only if truth present."""
    config.validate()
    inputs = read_replay_log(path)
    if config.synthesize_ae and inputs.ae_idx.size == 0:
        inputs = synthesize_ae(inputs, config)
    prior = replay_prior(inputs, config)
    record = run_filters(inputs, prior, config, config.trial_index)
    rmse: dict[str, dict[str, float]] = {}
    if inputs.truth_pos is not None:
        for name, track in record.tracks.items():
            rmse[name] = {
                "pos": float(np.sqrt(np.mean(track.err_pos**2))),
                "vel": float(np.sqrt(np.mean(track.err_vel**2))),
            }
    return ReplayResults(record, rmse)

"""Artifact emission: delimited outputs, a manifest, and rendered figures.

All delimited files use RFC-4180 quoting, '.' decimals, SI units, and numeric
seconds; floats are written with ``repr`` so re-parsing reproduces them
bitwise.  The manifest records the configuration hash and seed that produced
a directory, making outputs attributable and reruns checkable.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import plots
from .config import ScenarioConfig
from .metrics import TrialRecord
from .replay import ReplayResults, write_replay_log
from .studies import DynamicResults, SingleCorrectionResults

_VERSION = "0.1.0"


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return repr(float(value))


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_manifest(out_dir: Path, config: ScenarioConfig, extra: dict) -> None:
    manifest = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": _VERSION,
        "config": config.canonical_text().strip().split("\n"),
    }
    manifest.update(extra)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _trial_csv_rows(record: TrialRecord):
    names = list(record.tracks)
    header = ["t", "truth_rx", "truth_ry", "truth_rz",
              "truth_vx", "truth_vy", "truth_vz"]
    for name in names:
        header += [f"{name}_{c}" for c in (
            "rx", "ry", "rz", "vx", "vy", "vz",
            "err_pos", "err_vel", "err_total", "nees", "mahalanobis",
            "cov_d0", "cov_d1", "cov_d2", "cov_d3", "cov_d4", "cov_d5",
        )]
    rows = []
    for i, t_i in enumerate(record.t):
        row = [_fmt(t_i)]
        if record.truth_pos is not None:
            row += [_fmt(x) for x in record.truth_pos[i]]
            row += [_fmt(x) for x in record.truth_vel[i]]
        else:
            row += [""] * 6
        for name in names:
            track = record.tracks[name]
            row += [_fmt(x) for x in track.est_pos[i]]
            row += [_fmt(x) for x in track.est_vel[i]]
            row += [_fmt(track.err_pos[i]), _fmt(track.err_vel[i]),
                    _fmt(track.err_total[i]), _fmt(track.nees[i]),
                    _fmt(track.mahalanobis[i])]
            row += [_fmt(x) for x in track.cov_diag[i]]
        rows.append(row)
    return header, rows


def write_trial_record(path: Path, record: TrialRecord) -> None:
    header, rows = _trial_csv_rows(record)
    write_csv(path, header, rows)


def emit_dynamic_outputs(
    results: DynamicResults, config: ScenarioConfig, out_dir: str | Path
) -> Path:
    """Write per-trial records, replay logs, the aggregate table, manifest,
    and the error/NEES figures.  Returns the output directory."""
    out_dir = Path(out_dir)
    trials_dir = out_dir / "trials"
    logs_dir = out_dir / "logs"
    trials_dir.mkdir(parents=True, exist_ok=True)
    logs_dir.mkdir(parents=True, exist_ok=True)

    for record, inputs in zip(results.records, results.inputs):
        write_trial_record(trials_dir / f"trial_{record.trial:04d}.csv", record)
        write_replay_log(logs_dir / f"trial_{record.trial:04d}.csv", inputs)

    summary = results.summary
    names = sorted(summary.mean_nees)
    header = ["t"]
    for name in names:
        header += [f"{name}_mean_err_total", f"{name}_mean_err_pos",
                   f"{name}_mean_nees"]
    header.append("nees_bound")
    rows = []
    for i, t_i in enumerate(summary.t):
        row = [_fmt(t_i)]
        for name in names:
            row += [_fmt(summary.mean_err_total[name][i]),
                    _fmt(summary.mean_err_pos[name][i]),
                    _fmt(summary.mean_nees[name][i])]
        row.append(_fmt(summary.nees_bound))
        rows.append(row)
    write_csv(out_dir / "aggregate.csv", header, rows)

    write_manifest(out_dir, config, {
        "study": "dynamic",
        "n_trials": summary.n_trials,
        "err_reduction_pct": summary.err_reduction_pct,
        "nees_bound": summary.nees_bound,
    })
    plots.render_dynamic(summary, out_dir)
    return out_dir


def emit_single_correction_outputs(
    results: SingleCorrectionResults, config: ScenarioConfig, out_dir: str | Path
) -> Path:
    """Write the per-trial metric table, box/histogram data, manifest, figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    metrics_by_name = {
        "mahal_dckf": results.mahal_dckf, "mahal_ekf": results.mahal_ekf,
        "err_dckf": results.err_dckf, "err_ekf": results.err_ekf,
        "kl_dckf": results.kl_dckf, "kl_ekf": results.kl_ekf,
    }
    names = list(metrics_by_name)
    n = len(results.mahal_dckf)
    write_csv(
        out_dir / "trials.csv",
        ["trial"] + names,
        ([str(i)] + [_fmt(metrics_by_name[name][i]) for name in names]
         for i in range(n)),
    )

    box_rows = []
    for name in names:
        vals = metrics_by_name[name]
        finite = vals[np.isfinite(vals)]
        q = (np.quantile(finite, [0.0, 0.25, 0.5, 0.75, 1.0])
             if finite.size else [np.nan] * 5)
        box_rows.append([name] + [_fmt(x) for x in q])
    write_csv(out_dir / "box_stats.csv",
              ["metric", "min", "q1", "median", "q3", "max"], box_rows)

    for metric in ("mahal", "err", "kl"):
        both = np.concatenate([
            metrics_by_name[f"{metric}_dckf"], metrics_by_name[f"{metric}_ekf"]
        ])
        both = both[np.isfinite(both)]
        edges = np.histogram_bin_edges(both, bins=30) if both.size else np.arange(2.0)
        rows = []
        for name in (f"{metric}_dckf", f"{metric}_ekf"):
            vals = metrics_by_name[name]
            counts, _ = np.histogram(vals[np.isfinite(vals)], bins=edges)
            for lo, hi, count in zip(edges[:-1], edges[1:], counts):
                rows.append([name, _fmt(lo), _fmt(hi), str(int(count))])
        write_csv(out_dir / f"hist_{metric}.csv",
                  ["metric", "bin_lo", "bin_hi", "count"], rows)

    write_manifest(out_dir, config, {
        "study": "single-correction",
        "n_trials": n,
        "medians": results.medians(),
    })
    plots.render_single_correction(results, out_dir)
    return out_dir


def emit_replay_outputs(
    results: ReplayResults, config: ScenarioConfig, out_dir: str | Path
) -> Path:
    """Write the replayed trial record, manifest with RMSE, and figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trial_record(out_dir / "replay_record.csv", results.record)
    write_manifest(out_dir, config, {"study": "replay", "rmse": results.rmse})
    plots.render_replay(results.record, out_dir)
    return out_dir

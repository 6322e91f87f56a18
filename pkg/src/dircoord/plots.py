"""Figure rendering for study outputs (file-based, non-interactive)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = {"dckf": "tab:blue", "ekf": "tab:red"}
_LABELS = {"dckf": "directional KF", "ekf": "Cartesian EKF"}


def _style(name: str) -> dict:
    return {"color": _COLORS.get(name, "tab:gray"), "label": _LABELS.get(name, name)}


def render_dynamic(summary, out_dir: str | Path) -> list[Path]:
    """Mean error and mean NEES versus time, with the consistency bound."""
    out_dir = Path(out_dir)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for name in sorted(summary.mean_err_total):
        ax.plot(summary.t, summary.mean_err_total[name], **_style(name))
    ax.set_xlabel("time [s]")
    ax.set_ylabel("mean total estimation error")
    ax.set_title(f"average error over {summary.n_trials} trials")
    ax.legend()
    ax.grid(alpha=0.3)
    path = out_dir / "error_vs_time.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 4))
    for name in sorted(summary.mean_nees):
        with np.errstate(invalid="ignore"):
            ax.semilogy(summary.t, summary.mean_nees[name], **_style(name))
    ax.axhline(summary.nees_bound, color="k", linestyle="--",
               label="99.7% bound (trial-averaged)")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("mean NEES")
    ax.set_title("filter consistency")
    ax.legend()
    ax.grid(alpha=0.3)
    path = out_dir / "nees_vs_time.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def render_single_correction(results, out_dir: str | Path) -> list[Path]:
    """Box plots of Mahalanobis distance, error norm, and divergence."""
    out_dir = Path(out_dir)
    panels = [
        ("mahalanobis", results.mahal_dckf, results.mahal_ekf, "mahalanobis_box.png"),
        ("error norm [m]", results.err_dckf, results.err_ekf, "error_box.png"),
        ("divergence from particle cloud [nats]", results.kl_dckf, results.kl_ekf,
         "kl_box.png"),
    ]
    written = []
    for ylabel, dckf_vals, ekf_vals, fname in panels:
        fig, ax = plt.subplots(figsize=(4.5, 4))
        data = [dckf_vals[np.isfinite(dckf_vals)], ekf_vals[np.isfinite(ekf_vals)]]
        ax.boxplot(data, tick_labels=["directional", "Cartesian"], showfliers=False)
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3, axis="y")
        path = out_dir / fname
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written


def render_replay(record, out_dir: str | Path) -> list[Path]:
    """Error versus time for a replayed trial (skipped when truth is absent)."""
    out_dir = Path(out_dir)
    any_finite = any(np.any(np.isfinite(tr.err_pos)) for tr in record.tracks.values())
    if not any_finite:
        return []
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for name, track in record.tracks.items():
        axes[0].plot(record.t, track.err_pos, **_style(name))
        axes[1].plot(record.t, track.err_vel, **_style(name))
    axes[0].set_ylabel("position error [m]")
    axes[1].set_ylabel("velocity error [m/s]")
    axes[1].set_xlabel("time [s]")
    axes[0].legend()
    for ax in axes:
        ax.grid(alpha=0.3)
    path = out_dir / "replay_error.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]

"""Consistency and accuracy metrics for the Monte Carlo studies.

NEES/Mahalanobis quantify whether a filter's reported covariance matches its
actual errors; the k-nearest-neighbor divergence estimator compares whole
sample clouds against the particle-filter reference without any density
fitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree
from scipy.special import gammainc

from .errors import (
    DuplicatePointsError,
    MisalignedTimestampsError,
    SingularCovarianceError,
)


@dataclass
class ConsistencyRecord:
    """Per-timestep consistency numbers for one filter on one trial."""

    timestamp: float
    nees: float
    mahalanobis: float
    err_pos: float
    err_vel: float


def nees(err_vec: np.ndarray, cov: np.ndarray) -> float:
    """Normalized estimation error squared: err^T cov^-1 err.

    Raises:
        SingularCovarianceError: if the covariance cannot be factorized.
    """
    err_vec = np.asarray(err_vec, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(0.5 * (cov + cov.T))
    except (np.linalg.LinAlgError, ValueError):
        raise SingularCovarianceError("covariance is singular") from None
    return float(err_vec @ scipy.linalg.cho_solve(factor, err_vec))


def mahalanobis(err_vec: np.ndarray, cov: np.ndarray) -> float:
    """Square root of the NEES."""
    return float(np.sqrt(nees(err_vec, cov)))


def chi2_bound(dim: int, prob: float) -> float:
    """Chi-square quantile by bisection on the regularized incomplete gamma.

    Returns x with P(chi2_dim <= x) = prob; no quantile tables involved.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must be in (0, 1)")

    def cdf(x: float) -> float:
        return float(gammainc(0.5 * dim, 0.5 * x))

    lo, hi = 0.0, float(dim + 10.0 * np.sqrt(2.0 * dim) + 10.0)
    while cdf(hi) < prob:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def averaged_nees_bound(n_trials: int, dim: int, prob: float = 0.997) -> float:
    """One-sided bound for NEES averaged over n_trials independent trials."""
    return chi2_bound(n_trials * dim, prob) / n_trials


def _knn_distances(query: np.ndarray, data: np.ndarray, k: int, skip_self: bool) -> np.ndarray:
    tree = cKDTree(data)
    dist, _ = tree.query(query, k=k + 1 if skip_self else k, workers=1)
    return dist[:, -1]


def kl_divergence_knn(
    p_samples: np.ndarray, q_samples: np.ndarray, k: int = 5
) -> float:
    """k-NN divergence estimate D(P || Q) in nats from two sample clouds.

    For each p-point, compares its k-th neighbor distance within p against
    its k-th neighbor distance into q.  A deterministic 1e-12-scale jitter is
    applied first so exactly coincident points (e.g. resampling duplicates)
    do not produce zero distances.  Finite-sample estimates may be negative.

    Raises:
        DuplicatePointsError: if zero distances survive the jitter.
    """
    p = np.asarray(p_samples, dtype=float)
    q = np.asarray(q_samples, dtype=float)
    if p.ndim != 2 or q.ndim != 2 or p.shape[1] != q.shape[1]:
        raise ValueError("sample clouds must be 2-D with matching dimension")
    n, m, d = p.shape[0], q.shape[0], p.shape[1]
    if n < k + 1 or m < k:
        raise ValueError("need more samples than neighbors")

    jitter_rng = np.random.default_rng(0x5EED)
    scale = 1e-12 * max(float(np.std(p)), float(np.std(q)), 1e-300)
    p = p + jitter_rng.uniform(-scale, scale, p.shape)
    q = q + jitter_rng.uniform(-scale, scale, q.shape)

    rho_k = _knn_distances(p, p, k, skip_self=True)
    nu_k = _knn_distances(p, q, k, skip_self=False)
    if np.any(rho_k == 0.0) or np.any(nu_k == 0.0):
        raise DuplicatePointsError("coincident points defeat the k-NN estimate")
    return float((d / n) * np.sum(np.log(nu_k / rho_k)) + np.log(m / (n - 1.0)))


@dataclass
class FilterTrack:
    """Per-timestep outputs of one filter over one trial."""

    name: str
    est_pos: np.ndarray  # (steps, 3)
    est_vel: np.ndarray  # (steps, 3)
    cov_diag: np.ndarray  # (steps, 6) in the filter's native error coordinates
    nees: np.ndarray  # (steps,)
    mahalanobis: np.ndarray  # (steps,)
    err_pos: np.ndarray  # (steps,)
    err_vel: np.ndarray  # (steps,)
    err_total: np.ndarray  # (steps,) norm of the stacked 6-D error
    skipped_corrections: int = 0
    range_clamps: int = 0


@dataclass
class TrialRecord:
    """Truth and per-filter tracks for one Monte Carlo trial."""

    trial: int
    t: np.ndarray
    truth_pos: np.ndarray
    truth_vel: np.ndarray
    tracks: dict[str, FilterTrack]


@dataclass
class AggregateSummary:
    """Cross-trial averages on the shared time grid."""

    t: np.ndarray
    n_trials: int
    mean_err_total: dict[str, np.ndarray]
    mean_err_pos: dict[str, np.ndarray]
    mean_nees: dict[str, np.ndarray]
    nees_bound: float
    err_reduction_pct: float | None


def aggregate_trials(
    records: list[TrialRecord], prob: float = 0.997, dim: int = 6
) -> AggregateSummary:
    """Average error and NEES over trials; bound scaled for the trial average.

    Raises:
        MisalignedTimestampsError: if the trials do not share one time grid.
    """
    if not records:
        raise ValueError("no records to aggregate")
    t = records[0].t
    names = list(records[0].tracks)
    for rec in records[1:]:
        if rec.t.shape != t.shape or not np.array_equal(rec.t, t):
            raise MisalignedTimestampsError("trials use different time grids")

    mean_err_total = {
        name: np.mean([rec.tracks[name].err_total for rec in records], axis=0)
        for name in names
    }
    mean_err_pos = {
        name: np.mean([rec.tracks[name].err_pos for rec in records], axis=0)
        for name in names
    }
    mean_nees = {
        name: np.mean([rec.tracks[name].nees for rec in records], axis=0)
        for name in names
    }
    reduction = None
    if "dckf" in names and "ekf" in names:
        dckf_avg = float(np.mean(mean_err_total["dckf"]))
        ekf_avg = float(np.mean(mean_err_total["ekf"]))
        if ekf_avg > 0.0:
            reduction = 100.0 * (1.0 - dckf_avg / ekf_avg)
    return AggregateSummary(
        t=t,
        n_trials=len(records),
        mean_err_total=mean_err_total,
        mean_err_pos=mean_err_pos,
        mean_nees=mean_nees,
        nees_bound=averaged_nees_bound(len(records), dim, prob),
        err_reduction_pct=reduction,
    )

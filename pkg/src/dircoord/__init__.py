"""Localization with range + direction-cosine-matrix position coordinates.

A position is stored as (rho, dcm): its distance from the origin and a
rotation taking the first basis vector to its unit direction.  Range and
azimuth/elevation measurement models become linear or constant-Jacobian in
these coordinates, which makes the corresponding Kalman filter markedly more
consistent than a Cartesian EKF under large noise.  The package bundles the
coordinate algebra, belief conversion, the filters, consistency metrics, and
a Monte Carlo benchmark harness with a CLI.
"""

from .belief import (
    CartGaussian,
    DirGaussian,
    SigmaPointSet,
    cart_to_dir,
    dir_to_cart_gaussian,
    dir_to_cart_samples,
    sample_cart,
    sigma_points,
)
from .config import ScenarioConfig, load_config, write_example_config
from .coords import (
    DirectionalCoord,
    DirErrorVec,
    error_between,
    from_cartesian,
    perturb,
    to_cartesian,
)
from .filters import (
    CartesianEkf,
    DirectionalKf,
    ParticleFilter,
    static_correct_cart,
    static_correct_dir,
)
from .kinematics import (
    CartState,
    DcState,
    LinearizedDynamics,
    dc_rates,
    discretize,
    linearize,
    propagate,
    propagate_cart,
    s_inverse,
    s_matrix,
)
from .measurements import (
    AeMeas,
    DirVecMeas,
    LinearizedMeas,
    RangeMeas,
    ae_to_direction,
    direction_to_ae,
    simulate_ae,
    simulate_range,
)
from .metrics import (
    AggregateSummary,
    FilterTrack,
    TrialRecord,
    aggregate_trials,
    averaged_nees_bound,
    chi2_bound,
    kl_divergence_knn,
    mahalanobis,
    nees,
)
from .replay import run_replay
from .studies import (
    run_dynamic_study,
    run_single_correction_study,
)
from .trajectory import generate_trajectory

__version__ = "0.1.0"

"""Scalable subsampling and subagging with non-random block subsamples."""

from ._accel import BACKEND
from .core import (
    BlockScheme,
    Sample,
    Statistic,
    block_window,
    evaluate_full,
    make_block_scheme,
    subsample_statistics,
)
from .distribution import (
    Interval,
    SubsamplingDistribution,
    build_distribution,
    subsampling_ci,
    subsampling_distribution,
)
from .errors import (
    BiasDominatedError,
    InfeasibleTuningError,
    InsufficientBlocksError,
    InvalidInputError,
    InvalidSchemeError,
    NonConvergenceError,
    NumericalFailureError,
    StatisticEvaluationError,
    SubsamplingError,
)
from .experiment import ExperimentConfig, ExperimentReport, fit_rate_slope, run_experiment
from .io import ingest_csv
from .rng import DataModel, generate
from .statistics import huber, kde_at, mean, parse_statistic, quantile
from .subagging import SubaggingResult, clt_ci, sigma_hat_sq, subagg_estimate, two_level_ci
from .tuning import (
    TuningParams,
    beta_bounds,
    complexity_report,
    delta_bounds,
    optimal_beta,
    resolve_scheme,
    subagging_rate,
)

__version__ = "0.1.0"

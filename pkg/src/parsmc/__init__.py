"""parsmc: data-parallel particle filtering with exact cut-point resampling.

The full filtering cycle (likelihood weights, CDF construction by a two-pass
adder tree, exact multinomial resampling by the cut-point method, propagation)
runs as data-parallel maps over worker lanes with counter-based per-lane
random streams, so results are bit-identical for any lane count.  Sequential
baseline resamplers, the exactly solvable trend+noise benchmark model with
its Kalman oracle, and a benchmark CLI round out the package.
"""

from .backend import Backend
from .core import (
    ParamDraws,
    ParticleSystem,
    SuffStats,
    is_power_of_two,
    normalize_weights,
)
from .errors import (
    AllWeightsZeroError,
    BenchConfigError,
    InsufficientPointsError,
    NonFiniteWeightError,
    NotPowerOfTwoError,
    ParsmcError,
)
from .estimators import ParticleFilter, ParticleLearner
from .filtering import (
    FilterOutput,
    ParamSummary,
    PhaseTimings,
    run_particle_filter,
    run_particle_learning,
    snapshot_store,
    weighted_quantiles,
)
from .models import (
    InverseGammaPrior,
    Priors,
    TrendNoiseModel,
    kalman_filter,
    log_likelihood,
    propagate,
    simulate,
)
from .prefix_sum import (
    AdderTree,
    backward_adder,
    forward_adder,
    parallel_cdf,
    sequential_cdf,
    sequential_cumsum,
)
from .resampling import (
    cut_point_draw,
    cut_points_bruteforce,
    cut_points_parallel,
    cutpoint_indices,
    resample_cutpoint,
    resample_naive,
    resample_sorted,
    resample_stratified,
    resample_systematic,
)
from .rng import RngStream, StreamArray, uniforms_at

__version__ = "0.1.0"

__all__ = [
    "AdderTree",
    "AllWeightsZeroError",
    "Backend",
    "BenchConfigError",
    "FilterOutput",
    "InsufficientPointsError",
    "InverseGammaPrior",
    "NonFiniteWeightError",
    "NotPowerOfTwoError",
    "ParamDraws",
    "ParamSummary",
    "ParsmcError",
    "ParticleFilter",
    "ParticleLearner",
    "ParticleSystem",
    "PhaseTimings",
    "Priors",
    "RngStream",
    "StreamArray",
    "SuffStats",
    "TrendNoiseModel",
    "backward_adder",
    "cut_point_draw",
    "cut_points_bruteforce",
    "cut_points_parallel",
    "cutpoint_indices",
    "forward_adder",
    "is_power_of_two",
    "kalman_filter",
    "log_likelihood",
    "normalize_weights",
    "parallel_cdf",
    "propagate",
    "resample_cutpoint",
    "resample_naive",
    "resample_sorted",
    "resample_stratified",
    "resample_systematic",
    "run_particle_filter",
    "run_particle_learning",
    "sequential_cdf",
    "sequential_cumsum",
    "simulate",
    "snapshot_store",
    "uniforms_at",
    "weighted_quantiles",
]

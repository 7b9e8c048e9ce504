"""Bayesian adaptive dose-response trials driven by Gaussian-process regression."""

from .acquisition import (
    EvaluationGrid,
    NonFiniteUtility,
    StationaryTargets,
    UtilityWeights,
    argmax_on_grid,
    stationary_targets,
    utility_u3,
    utility_u12,
)
from .config import ParseError, format_config, load_config, paper_config, parse_config
from .gp import (
    FactorizationFailure,
    KernelSpec,
    ObservationSet,
    PosteriorModel,
    fit_posterior,
    posterior_mean,
    posterior_mean_deriv,
    posterior_std,
    rbf_kernel,
)
from .harness import compare, compute_metrics, true_optimum
from .rng import RNG_ALGORITHM_ID, TrialRng, stream
from .trial import (
    GroundTruth,
    LiveState,
    NoPendingDose,
    NonFiniteOutcome,
    ScenarioConfig,
    TrialTrace,
    ValidationError,
    live_begin,
    live_step,
    run_adaptive,
    run_fixed,
    simulate_outcome,
    true_performance,
)

__version__ = "0.1.0"

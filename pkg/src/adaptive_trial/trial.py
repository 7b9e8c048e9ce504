"""
Simulated dose-response trials: logistic ground truth, the adaptive design
that picks each next dose by maximizing the composite utility, the fixed
equally spaced baseline, and a stepwise live mode for outcomes entered by
hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .acquisition import EvaluationGrid, UtilityWeights, argmax_on_grid, utility_u3
from .gp import KernelSpec, ObservationSet, PosteriorModel, fit_posterior
from .rng import RNG_ALGORITHM_ID, TrialRng

__all__ = [
    "ValidationError",
    "NoPendingDose",
    "NonFiniteOutcome",
    "GroundTruth",
    "ScenarioConfig",
    "TrialStep",
    "TrialTrace",
    "LiveState",
    "true_performance",
    "true_slope",
    "simulate_outcome",
    "fit_observations",
    "next_dose",
    "run_fixed",
    "run_adaptive",
    "run_design",
    "live_begin",
    "live_step",
]

DESIGNS = ("adaptive", "fixed")


class ValidationError(ValueError):
    pass


class NoPendingDose(RuntimeError):
    pass


class NonFiniteOutcome(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    midpoint: float = 6.0
    intercept: float = 1.0
    noise_std: float = 0.1

    def __post_init__(self):
        for name in ("midpoint", "intercept", "noise_std"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"truth.{name} must be finite")
        if self.noise_std < 0:
            raise ValidationError("truth.noise_std must be >= 0")


@dataclass(frozen=True)
class ScenarioConfig:
    truth: GroundTruth = GroundTruth()
    kernel: KernelSpec = KernelSpec()
    weights: UtilityWeights = UtilityWeights()
    domain_lo: float = 0.0
    domain_hi: float = 12.0
    budget: int = 12
    grid_step: float = 0.01
    seed: int = 0
    warm_start: ObservationSet = ObservationSet()
    # where warm_start was loaded from, kept so the config can be written back
    warm_start_path: Optional[str] = None

    def __post_init__(self):
        if not (math.isfinite(self.domain_lo) and math.isfinite(self.domain_hi)):
            raise ValidationError("domain bounds must be finite")
        if not self.domain_lo < self.domain_hi:
            raise ValidationError(
                f"domain.lo < domain.hi violated ({self.domain_lo} >= {self.domain_hi})"
            )
        if isinstance(self.budget, bool) or not isinstance(self.budget, int) or self.budget < 1:
            raise ValidationError(f"budget must be an integer >= 1, got {self.budget!r}")
        if not (math.isfinite(self.grid_step) and self.grid_step > 0):
            raise ValidationError(f"grid.step must be > 0, got {self.grid_step!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not self.warm_start.within(self.domain_lo, self.domain_hi):
            raise ValidationError("warm_start points must lie within [domain.lo, domain.hi]")
        try:
            self.grid
        except ValueError as exc:
            raise ValidationError(f"grid.step: {exc}") from None

    @property
    def grid(self) -> EvaluationGrid:
        return EvaluationGrid(self.domain_lo, self.domain_hi, self.grid_step)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class TrialStep:
    t: int
    x: float
    y: float
    acq_argmax: Optional[float] = None
    acq_value: Optional[float] = None


@dataclass(frozen=True)
class TrialTrace:
    design_kind: str
    steps: tuple
    config_echo: Optional[ScenarioConfig] = field(default=None, compare=False)
    rng_algorithm_id: str = RNG_ALGORITHM_ID

    def __post_init__(self):
        if self.design_kind not in DESIGNS:
            raise ValueError(f"unknown design {self.design_kind!r}")
        for i, step in enumerate(self.steps, start=1):
            if step.t != i:
                raise ValueError(f"trace steps must be numbered 1..n, got t={step.t} at {i}")
            if self.design_kind == "fixed" and step.acq_argmax is not None:
                raise ValueError("fixed-design steps carry no acquisition fields")

    def __len__(self):
        return len(self.steps)

    @property
    def observations(self) -> ObservationSet:
        return ObservationSet((s.x, s.y) for s in self.steps)

    @property
    def doses(self) -> list:
        return [s.x for s in self.steps]


@dataclass(frozen=True)
class LiveState:
    config: ScenarioConfig
    observations: ObservationSet = ObservationSet()
    pending_x: Optional[float] = None

    @property
    def t(self) -> int:
        """Step number of the pending dose."""
        return len(self.observations) + 1

    @property
    def complete(self) -> bool:
        return self.pending_x is None and len(self.observations) >= self.config.budget


def true_performance(truth: GroundTruth, x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float) + truth.midpoint)) + truth.intercept


def true_slope(truth: GroundTruth, x):
    s = 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float) + truth.midpoint))
    return s * (1.0 - s)


def simulate_outcome(truth: GroundTruth, x: float, rng: TrialRng) -> float:
    # the draw is consumed even when noise_std == 0 to keep streams aligned
    return float(true_performance(truth, x)) + truth.noise_std * rng.standard_normal()


def fit_observations(config: ScenarioConfig, observations: ObservationSet) -> PosteriorModel:
    """Posterior over warm-start data followed by the trial observations."""
    data = config.warm_start.extend(observations)
    return fit_posterior(data, config.kernel, config.truth.noise_std)


def next_dose(config: ScenarioConfig, observations: ObservationSet) -> tuple[float, float]:
    model = fit_observations(config, observations)
    return argmax_on_grid(lambda x: utility_u3(model, x, config.weights), config.grid)


def fixed_doses(lo: float, hi: float, n: int) -> list:
    if n == 1:
        return [0.5 * (lo + hi)]
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


def run_fixed(config: ScenarioConfig, rng: TrialRng) -> TrialTrace:
    steps = []
    for t, x in enumerate(fixed_doses(config.domain_lo, config.domain_hi, config.budget), 1):
        steps.append(TrialStep(t, x, simulate_outcome(config.truth, x, rng)))
    return TrialTrace("fixed", tuple(steps), config)


def run_adaptive(config: ScenarioConfig, rng: TrialRng) -> TrialTrace:
    """Sequential design: one uniform draw, then the utility argmax each step.

    With warm-start data the random first draw is skipped and step 1 already
    uses the acquisition.
    """
    observations = ObservationSet()
    steps = []
    for t in range(1, config.budget + 1):
        if t == 1 and len(config.warm_start) == 0:
            x, value = rng.uniform(config.domain_lo, config.domain_hi), None
            argmax = None
        else:
            x, value = next_dose(config, observations)
            argmax = x
        y = simulate_outcome(config.truth, x, rng)
        observations = observations.append(x, y)
        steps.append(TrialStep(t, x, y, argmax, value))
    return TrialTrace("adaptive", tuple(steps), config)


def run_design(design: str, config: ScenarioConfig, rng: TrialRng) -> TrialTrace:
    if design == "adaptive":
        return run_adaptive(config, rng)
    if design == "fixed":
        return run_fixed(config, rng)
    raise ValueError(f"unknown design {design!r}")


def live_begin(config: ScenarioConfig, rng: TrialRng) -> tuple[LiveState, float]:
    if len(config.warm_start) == 0:
        x = rng.uniform(config.domain_lo, config.domain_hi)
    else:
        x, _ = next_dose(config, ObservationSet())
    return LiveState(config, ObservationSet(), x), x


def live_step(state: LiveState, observed_y: float) -> tuple[LiveState, Optional[float]]:
    """Record the outcome for the pending dose and recommend the next one.

    Returns ``(state, None)`` once the budget is exhausted.
    """
    if state.pending_x is None:
        raise NoPendingDose("no dose is awaiting an outcome")
    try:
        y = float(observed_y)
    except (TypeError, ValueError):
        raise NonFiniteOutcome(f"outcome {observed_y!r} is not a number") from None
    if not math.isfinite(y):
        raise NonFiniteOutcome(f"outcome {observed_y!r} is not finite")
    observations = state.observations.append(state.pending_x, y)
    if len(observations) >= state.config.budget:
        return LiveState(state.config, observations, None), None
    x, _ = next_dose(state.config, observations)
    return LiveState(state.config, observations, x), x

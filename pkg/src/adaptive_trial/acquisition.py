"""Utility functions over a fitted posterior and exhaustive grid maximization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .gp import PosteriorModel, posterior_mean, posterior_mean_deriv, posterior_std

__all__ = [
    "NonFiniteUtility",
    "UtilityWeights",
    "EvaluationGrid",
    "StationaryTargets",
    "utility_u3",
    "utility_u12",
    "argmax_on_grid",
    "stationary_targets",
]


class NonFiniteUtility(ArithmeticError):
    pass


@dataclass(frozen=True)
class UtilityWeights:
    lambda1: float = 30.0
    lambda2: float = 10.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class EvaluationGrid:
    """Arithmetic grid lo, lo + step, ..., hi with both endpoints included."""

    lo: float = 0.0
    hi: float = 12.0
    step: float = 0.01

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError(f"grid step must be positive, got {self.step!r}")
        ratio = (self.hi - self.lo) / self.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"(hi - lo) / step = {ratio!r} is not integral; the grid would miss hi"
            )

    @property
    def size(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    @property
    def points(self) -> np.ndarray:
        # rounding strips linspace residue (5.3100000000000005 -> 5.31)
        return np.round(np.linspace(self.lo, self.hi, self.size), 10)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class StationaryTargets(NamedTuple):
    x_exploit: float
    x_slope: float
    x_explore: float


def utility_u3(model: PosteriorModel, x, w: UtilityWeights):
    """Posterior mean plus weighted slope (exploitation) and std (exploration)."""
    return (
        posterior_mean(model, x)
        + w.lambda1 * posterior_mean_deriv(model, x)
        + w.lambda2 * posterior_std(model, x)
    )


def utility_u12(model: PosteriorModel, x, lambda1: float):
    return posterior_mean(model, x) + lambda1 * posterior_mean_deriv(model, x)


def _evaluate(f: Callable, xs: np.ndarray) -> np.ndarray:
    # vectorized call first; fall back to pointwise for scalar-only callables
    try:
        values = np.asarray(f(xs), dtype=float)
        if values.shape != xs.shape:
            raise ValueError
    except (TypeError, ValueError):
        values = np.array([float(f(x)) for x in xs])
    return values


def argmax_on_grid(f: Callable, grid: EvaluationGrid) -> tuple[float, float]:
    """Return ``(x_star, f(x_star))`` over the grid; ties go to the smallest x.

    ``f`` may be vectorized (array in, array out) or scalar-only.
    Raises NonFiniteUtility if any grid value is NaN or infinite.
    """
    xs = grid.points
    values = _evaluate(f, xs)
    bad = ~np.isfinite(values)
    if bad.any():
        raise NonFiniteUtility(f"utility is not finite at x={xs[bad][0]!r}")
    i = int(np.argmax(values))  # first occurrence
    return float(xs[i]), float(values[i])


def stationary_targets(model: PosteriorModel, grid: EvaluationGrid) -> StationaryTargets:
    return StationaryTargets(
        argmax_on_grid(lambda x: posterior_mean(model, x), grid)[0],
        argmax_on_grid(lambda x: posterior_mean_deriv(model, x), grid)[0],
        argmax_on_grid(lambda x: posterior_std(model, x), grid)[0],
    )

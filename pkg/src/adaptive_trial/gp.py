"""
Exact Gaussian-process regression in one dimension with an RBF kernel.

The posterior is refit from scratch whenever data changes; trials hold a few
dozen points at most so the cubic cost of the Cholesky factorization is
irrelevant.  All prediction functions accept a scalar or an array of inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

__all__ = [
    "JITTER",
    "FactorizationFailure",
    "KernelSpec",
    "ObservationSet",
    "PosteriorModel",
    "rbf_kernel",
    "fit_posterior",
    "posterior_mean",
    "posterior_std",
    "posterior_mean_deriv",
]

JITTER = 1e-10


class FactorizationFailure(ArithmeticError):
    """The jittered Gram matrix is not numerically positive definite."""


@dataclass(frozen=True)
class KernelSpec:
    length_scale: float = 2.0
    signal_amplitude: float = 1.0

    def __post_init__(self):
        for name in ("length_scale", "signal_amplitude"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ObservationSet:
    """Ordered (dose, outcome) pairs; index i is trial step i + 1."""

    points: tuple = ()

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        for x, y in pts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite observation ({x!r}, {y!r})")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def y(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], dtype=float)

    def append(self, x: float, y: float) -> "ObservationSet":
        return ObservationSet(self.points + ((x, y),))

    def extend(self, other) -> "ObservationSet":
        return ObservationSet(self.points + tuple(other))

    def prefix(self, t: int) -> "ObservationSet":
        return ObservationSet(self.points[:t])

    def within(self, lo: float, hi: float) -> bool:
        return all(lo <= x <= hi for x, _ in self.points)


@dataclass(frozen=True, eq=False)
class PosteriorModel:
    """Fitted GP state.  With no training points it is the zero-mean prior."""

    spec: KernelSpec
    noise_std: float
    train_x: np.ndarray = field(repr=False)
    factor: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.train_x)


def rbf_kernel(x1, x2, spec: KernelSpec):
    """amp^2 * exp(-(x1 - x2)^2 / (2 l^2)); broadcasts like numpy."""
    d = np.subtract(x1, x2)
    out = spec.signal_amplitude**2 * np.exp(-0.5 * (d / spec.length_scale) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def _cross(model: PosteriorModel, x) -> np.ndarray:
    # shape (n_train, n_query)
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    return rbf_kernel(model.train_x[:, None], xq[None, :], model.spec)


def _shape_like(x, values):
    return float(values[0]) if np.ndim(x) == 0 else values


def fit_posterior(data: ObservationSet, spec: KernelSpec, noise_std: float) -> PosteriorModel:
    if not (math.isfinite(noise_std) and noise_std >= 0):
        raise ValueError(f"noise_std must be >= 0, got {noise_std!r}")
    x = data.x
    y = data.y
    n = len(x)
    if n == 0:
        empty = np.zeros(0)
        return PosteriorModel(spec, noise_std, empty, np.zeros((0, 0)), empty)

    gram = rbf_kernel(x[:, None], x[None, :], spec)
    gram[np.diag_indices(n)] += noise_std**2 + JITTER
    try:
        factor = linalg.cholesky(gram, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationFailure(
            f"Gram matrix of {n} points is not positive definite "
            f"(length_scale={spec.length_scale}, noise_std={noise_std})"
        ) from exc
    if not np.all(np.diag(factor) > 0):
        raise FactorizationFailure("Cholesky factor has a non-positive diagonal")
    weights = linalg.cho_solve((factor, True), y)
    # one refinement step against K + noise^2 I removes the jitter's bias
    gram[np.diag_indices(n)] -= JITTER
    weights = weights + linalg.cho_solve((factor, True), y - gram @ weights)
    for arr in (x, factor, weights):
        arr.setflags(write=False)
    return PosteriorModel(spec, noise_std, x, factor, weights)


def posterior_mean(model: PosteriorModel, x):
    if model.n == 0:
        return _shape_like(x, np.zeros(np.size(x)))
    return _shape_like(x, _cross(model, x).T @ model.weights)


def posterior_std(model: PosteriorModel, x):
    """Predictive std of the latent function (observation noise excluded)."""
    prior_var = model.spec.signal_amplitude**2
    size = np.size(x)
    if model.n == 0:
        return _shape_like(x, np.full(size, model.spec.signal_amplitude))
    v = linalg.solve_triangular(model.factor, _cross(model, x), lower=True)
    var = prior_var - np.einsum("ij,ij->j", v, v)
    return _shape_like(x, np.sqrt(np.clip(var, 0.0, prior_var)))


def posterior_mean_deriv(model: PosteriorModel, x):
    if model.n == 0:
        return _shape_like(x, np.zeros(np.size(x)))
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    k = _cross(model, xq)
    slope = (model.train_x[:, None] - xq[None, :]) / model.spec.length_scale**2
    return _shape_like(x, (slope * k).T @ model.weights)

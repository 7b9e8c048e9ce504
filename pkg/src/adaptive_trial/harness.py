"""
Replication study of adaptive vs fixed designs, plus CSV and SVG output.

Every replication owns a private stream derived from
``(config.seed, replication_index, design_code)``, so reports do not depend on
how the replications are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, TextIO

import numpy as np

from .acquisition import EvaluationGrid, UtilityWeights, argmax_on_grid, utility_u12
from .gp import PosteriorModel, posterior_mean, posterior_mean_deriv, posterior_std
from .rng import RNG_ALGORITHM_ID, stream
from .trial import (
    GroundTruth,
    ScenarioConfig,
    TrialStep,
    TrialTrace,
    fit_observations,
    run_design,
    true_performance,
    true_slope,
)

__all__ = [
    "DEFAULT_REGION",
    "DESIGN_CODES",
    "EmptyRegion",
    "TrialMetrics",
    "MetricRow",
    "ComparisonReport",
    "true_optimum",
    "compute_metrics",
    "literal_sigma",
    "replication_stream",
    "compare",
    "write_trace_csv",
    "read_trace_csv",
    "write_posterior_csv",
    "read_posterior_csv",
    "write_comparison_csv",
    "render_svg",
    "render_curves_svg",
]

DEFAULT_REGION = (4.0, 8.0)
DESIGN_CODES = {"adaptive": 0, "fixed": 1}
METRICS = ("rmse", "mean_sigma", "opt_err")


class EmptyRegion(ValueError):
    pass


class TrialMetrics(NamedTuple):
    rmse_opt_region: float
    mean_sigma_opt_region: float
    est_optimum: float
    opt_error: float


class MetricRow(NamedTuple):
    seed: int
    design: str
    checkpoint: int
    metrics: TrialMetrics


@dataclass(frozen=True)
class ComparisonReport:
    """Per-replication metric rows and win-rates of ``designs[0]`` over ``designs[1]``.

    ``win_rates[(metric, t_challenger, t_baseline)]`` is the fraction of seeds
    where the challenger's metric at checkpoint ``t_challenger`` is strictly
    lower than the baseline's at ``t_baseline``; exact ties count one half.
    """

    n_seeds: int
    designs: tuple
    checkpoints: tuple
    rows: tuple
    win_rates: dict

    def metric(self, design: str, checkpoint: int, name: str) -> np.ndarray:
        return np.array(
            [
                _metric_value(r.metrics, name)
                for r in self.rows
                if r.design == design and r.checkpoint == checkpoint
            ]
        )


def _metric_value(m: TrialMetrics, name: str) -> float:
    return {
        "rmse": m.rmse_opt_region,
        "mean_sigma": m.mean_sigma_opt_region,
        "est_opt": m.est_optimum,
        "opt_err": m.opt_error,
    }[name]


def true_optimum(truth: GroundTruth, lambda1: float, grid: EvaluationGrid) -> float:
    """Grid argmax of theta(x) + lambda1 * theta'(x): the combined optimum."""
    return argmax_on_grid(
        lambda x: true_performance(truth, x) + lambda1 * true_slope(truth, x), grid
    )[0]


def compute_metrics(
    model: PosteriorModel,
    truth: GroundTruth,
    lambda1: float,
    grid: EvaluationGrid,
    region=DEFAULT_REGION,
) -> TrialMetrics:
    lo, hi = region
    xs = grid.points
    inside = xs[(xs >= lo) & (xs <= hi)]
    if inside.size == 0:
        raise EmptyRegion(f"no grid point in region [{lo}, {hi}]")
    err = posterior_mean(model, inside) - true_performance(truth, inside)
    est = argmax_on_grid(lambda x: utility_u12(model, x, lambda1), grid)[0]
    return TrialMetrics(
        float(np.sqrt(np.mean(err**2))),
        float(np.mean(posterior_std(model, inside))),
        est,
        abs(est - true_optimum(truth, lambda1, grid)),
    )


def literal_sigma(model: PosteriorModel, x):
    """sqrt(v - v^2 / (v + noise^2)) with v the posterior variance.

    Alternative uncertainty expression kept for sensitivity reporting only;
    nothing in the trial loop uses it.
    """
    v = np.square(posterior_std(model, x))
    s2 = model.noise_std**2
    total = v + s2
    # v - v^2/(v + s2) == v * s2 / (v + s2), which is 0 when both vanish
    out = np.sqrt(np.divide(v * s2, total, out=np.zeros_like(v), where=total > 0))
    return float(out) if np.ndim(out) == 0 else out


def replication_stream(master_seed: int, index: int, design: str):
    return stream(master_seed, index, DESIGN_CODES[design])


def _replicate(args) -> list:
    config, index, designs, checkpoints, region = args
    rows = []
    for design in designs:
        trace = run_design(design, config, replication_stream(config.seed, index, design))
        for t in checkpoints:
            model = fit_observations(config, trace.observations.prefix(t))
            metrics = compute_metrics(
                model, config.truth, config.weights.lambda1, config.grid, region
            )
            rows.append(MetricRow(index, design, t, metrics))
    return rows


def _win_rate(challenger: np.ndarray, baseline: np.ndarray) -> float:
    wins = np.sum(challenger < baseline) + 0.5 * np.sum(challenger == baseline)
    return float(wins / len(challenger))


def compare(
    config: ScenarioConfig,
    n_seeds: int,
    checkpoints: Sequence[int],
    designs: Sequence[str] = ("adaptive", "fixed"),
    region=DEFAULT_REGION,
    workers: int = 1,
) -> ComparisonReport:
    """Run ``n_seeds`` replications of each design and score them at checkpoints.

    Metrics at checkpoint t use the posterior refit on the first t trial
    observations (plus any warm start).  Any failing replication aborts the
    whole report.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    checkpoints = tuple(sorted(set(int(t) for t in checkpoints)))
    if not checkpoints or checkpoints[0] < 1 or checkpoints[-1] > config.budget:
        raise ValueError(f"checkpoints must lie in 1..{config.budget}, got {checkpoints}")
    if len(designs) != 2:
        raise ValueError("compare needs exactly two designs (challenger, baseline)")
    designs = tuple(designs)
    for d in designs:
        if d not in DESIGN_CODES:
            raise ValueError(f"unknown design {d!r}")
    jobs = [(config, i, designs, checkpoints, region) for i in range(n_seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_replicate, jobs))
    else:
        chunks = [_replicate(job) for job in jobs]
    rows = tuple(r for chunk in chunks for r in chunk)

    # both sides taken from row positions so a self-comparison pairs correctly
    per_design = len(checkpoints)
    block = 2 * per_design
    win_rates = {}
    for name in METRICS:
        for i, ta in enumerate(checkpoints):
            for j, tb in enumerate(checkpoints):
                a = np.array([_metric_value(rows[s * block + i].metrics, name) for s in range(n_seeds)])
                b = np.array(
                    [_metric_value(rows[s * block + per_design + j].metrics, name) for s in range(n_seeds)]
                )
                win_rates[(name, ta, tb)] = _win_rate(a, b)
    return ComparisonReport(n_seeds, designs, checkpoints, rows, win_rates)


# -- CSV ------------------------------------------------------------------


def _num(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def _writer(sink: TextIO):
    return csv.writer(sink, lineterminator="\n")


def write_trace_csv(trace: TrialTrace, sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["t", "x", "y", "acq_argmax", "acq_value"])
    for s in trace.steps:
        w.writerow([s.t, _num(s.x), _num(s.y), _num(s.acq_argmax), _num(s.acq_value)])
    sink.write(f"# design={trace.design_kind}\n")
    sink.write(f"# rng={trace.rng_algorithm_id}\n")


def read_trace_csv(source: TextIO) -> TrialTrace:
    meta = {"design": "adaptive", "rng": RNG_ALGORITHM_ID}
    body = []
    for line in source.read().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    if header != ["t", "x", "y", "acq_argmax", "acq_value"]:
        raise ValueError(f"unexpected trace header {header}")
    opt = lambda s: float(s) if s else None  # noqa: E731
    steps = tuple(
        TrialStep(int(t), float(x), float(y), opt(a), opt(v)) for t, x, y, a, v in reader
    )
    return TrialTrace(meta["design"], steps, None, meta["rng"])


def posterior_columns(model: PosteriorModel, grid: EvaluationGrid, weights: UtilityWeights):
    xs = grid.points
    mu = posterior_mean(model, xs)
    sigma = posterior_std(model, xs)
    dmu = posterior_mean_deriv(model, xs)
    u3 = mu + weights.lambda1 * dmu + weights.lambda2 * sigma
    return xs, mu, sigma, dmu, u3


def write_posterior_csv(
    model: PosteriorModel, grid: EvaluationGrid, weights: UtilityWeights, sink: TextIO
) -> None:
    w = _writer(sink)
    w.writerow(["x", "mu", "sigma", "dmu_dx", "u3"])
    for row in zip(*posterior_columns(model, grid, weights)):
        w.writerow([_num(v) for v in row])


def read_posterior_csv(source: TextIO) -> dict:
    reader = csv.reader(source)
    header = next(reader)
    if header != ["x", "mu", "sigma", "dmu_dx", "u3"]:
        raise ValueError(f"unexpected posterior header {header}")
    cols = list(zip(*[[float(v) for v in row] for row in reader if row]))
    return {name: np.array(col) for name, col in zip(header, cols)}


def write_comparison_csv(report: ComparisonReport, sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["seed", "design", "checkpoint", "rmse", "mean_sigma", "est_opt", "opt_err"])
    for r in report.rows:
        w.writerow([r.seed, r.design, r.checkpoint] + [_num(v) for v in (
            r.metrics.rmse_opt_region,
            r.metrics.mean_sigma_opt_region,
            r.metrics.est_optimum,
            r.metrics.opt_error,
        )])
    challenger, baseline = report.designs
    sink.write(f"# aggregate n_seeds={report.n_seeds} challenger={challenger} baseline={baseline}\n")
    sink.write("# metric,challenger_checkpoint,baseline_checkpoint,win_rate\n")
    for (name, ta, tb), rate in report.win_rates.items():
        sink.write(f"# {name},{ta},{tb},{rate!r}\n")


# -- SVG ------------------------------------------------------------------

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 60, 20, 20, 50
YELLOW = "#f5c518"


class PanelMapping(NamedTuple):
    """Linear data-to-pixel map for the plotting panel.

    px = left + (x - x_lo) / (x_hi - x_lo) * (right - left)
    py = bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top)
    """

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def px(self, x):
        span = WIDTH - MARGIN_RIGHT - MARGIN_LEFT
        return MARGIN_LEFT + (np.asarray(x) - self.x_lo) / (self.x_hi - self.x_lo) * span

    def py(self, y):
        span = HEIGHT - MARGIN_BOTTOM - MARGIN_TOP
        return HEIGHT - MARGIN_BOTTOM - (np.asarray(y) - self.y_lo) / (self.y_hi - self.y_lo) * span

    def data_x(self, px: float) -> float:
        span = WIDTH - MARGIN_RIGHT - MARGIN_LEFT
        return self.x_lo + (px - MARGIN_LEFT) / span * (self.x_hi - self.x_lo)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _path(xs, ys) -> str:
    return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys))


def render_curves_svg(
    xs: np.ndarray,
    mu: np.ndarray,
    sigma: np.ndarray,
    u3: np.ndarray,
    points: Sequence,
    truth: GroundTruth,
    weights: UtilityWeights,
    grid: EvaluationGrid,
    sink: TextIO,
    band_multiplier: float = 1.96,
) -> None:
    """Draw precomputed posterior curves; ``render_svg`` is the model-level entry."""
    theta = true_performance(truth, xs)
    lower, upper = mu - band_multiplier * sigma, mu + band_multiplier * sigma
    pts = [(float(x), float(y)) for x, y in points]
    ys_all = np.concatenate([theta, lower, upper, [p[1] for p in pts]])
    y_lo, y_hi = float(ys_all.min()), float(ys_all.max())
    pad = 0.05 * (y_hi - y_lo) or 0.5
    m = PanelMapping(grid.lo, grid.hi, y_lo - pad, y_hi + pad)

    # utility curve rescaled to the lower 40% of the panel
    u_lo, u_hi = float(u3.min()), float(u3.max())
    u_scaled = (u3 - u_lo) / ((u_hi - u_lo) or 1.0)
    u_y = m.y_lo + 0.4 * (m.y_hi - m.y_lo) * u_scaled
    x_opt = true_optimum(truth, weights.lambda1, grid)

    px = m.px(xs)
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<polygon class="band" fill="#4a7bd0" fill-opacity="0.25" stroke="none" points="'
        + _path(np.concatenate([px, px[::-1]]), np.concatenate([m.py(upper), m.py(lower)[::-1]]))
        + '"/>',
        f'<polyline class="truth" fill="none" stroke="#d62728" stroke-width="2" '
        f'stroke-dasharray="8,5" points="{_path(px, m.py(theta))}"/>',
        f'<polyline class="mean" fill="none" stroke="#1f4fa0" stroke-width="2" '
        f'points="{_path(px, m.py(mu))}"/>',
        f'<polyline class="u3" fill="none" stroke="black" stroke-width="1.5" '
        f'points="{_path(px, m.py(u_y))}"/>',
        f'<line class="optimum" x1="{_fmt(float(m.px(x_opt)))}" y1="{top}" '
        f'x2="{_fmt(float(m.px(x_opt)))}" y2="{bottom}" stroke="{YELLOW}" stroke-width="3"/>',
    ]
    for x, y in pts:
        out.append(
            f'<circle class="obs" cx="{_fmt(float(m.px(x)))}" cy="{_fmt(float(m.py(y)))}" '
            'r="4" fill="black"/>'
        )
    for tick in range(int(math.ceil(grid.lo)), int(math.floor(grid.hi)) + 1):
        tx = _fmt(float(m.px(tick)))
        out.append(f'<line class="tick" x1="{tx}" y1="{bottom}" x2="{tx}" y2="{bottom + 5}" stroke="black"/>')
        out.append(
            f'<text x="{tx}" y="{bottom + 18}" font-size="12" text-anchor="middle">{tick}</text>'
        )
    out.append(
        f'<text x="{(left + right) // 2}" y="{HEIGHT - 10}" font-size="14" '
        'text-anchor="middle">tutoring hours x</text>'
    )
    out.append(
        f'<text x="15" y="{(top + bottom) // 2}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 15 {(top + bottom) // 2})">performance</text>'
    )
    out.append("</svg>")
    sink.write("\n".join(out) + "\n")


def render_svg(
    model: PosteriorModel,
    trace: TrialTrace,
    truth: GroundTruth,
    weights: UtilityWeights,
    grid: EvaluationGrid,
    sink: TextIO,
    band_multiplier: float = 1.96,
) -> None:
    xs, mu, sigma, _, u3 = posterior_columns(model, grid, weights)
    points = [(s.x, s.y) for s in trace.steps]
    render_curves_svg(xs, mu, sigma, u3, points, truth, weights, grid, sink, band_multiplier)


def svg_string(*args, **kwargs) -> str:
    buf = io.StringIO()
    render_svg(*args, sink=buf, **kwargs)
    return buf.getvalue()

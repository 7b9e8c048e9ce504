"""Command-line entry point: ``run``, ``compare``, ``plot`` and ``live``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

from .acquisition import NonFiniteUtility, stationary_targets
from .config import (
    ParseError,
    ValidationError,
    atomic_write,
    format_live_state,
    load_config,
    parse_live_state,
)
from .gp import FactorizationFailure
from .harness import (
    DEFAULT_REGION,
    compare,
    read_posterior_csv,
    read_trace_csv,
    render_curves_svg,
    render_svg,
    true_optimum,
    write_comparison_csv,
    write_posterior_csv,
    write_trace_csv,
)
from .rng import stream
from .trial import NonFiniteOutcome, fit_observations, live_begin, live_step, run_design


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


def _checkpoints(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("no checkpoints given")
    return values


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaptive-trial", description="Bayesian adaptive dose-response trials")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one trial and write trace/posterior CSVs")
    run.add_argument("--config", required=True)
    run.add_argument("--design", choices=("adaptive", "fixed"), default="adaptive")
    run.add_argument("--seed", type=_non_negative_int)
    run.add_argument("--out-dir", default="out")
    run.add_argument("--svg", action="store_true", help="also render plot.svg")
    run.add_argument("--band-multiplier", type=float, default=1.96)

    cmp_ = sub.add_parser("compare", help="replication study of adaptive vs fixed designs")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--seeds", type=_positive_int, default=100)
    cmp_.add_argument("--seed", type=_non_negative_int, help="master seed (overrides config)")
    cmp_.add_argument("--checkpoints", type=_checkpoints)
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--workers", type=_positive_int, default=1)

    plot = sub.add_parser("plot", help="re-render an SVG from stored trace/posterior CSVs")
    plot.add_argument("--config", required=True)
    plot.add_argument("--out-dir", default="out", help="directory holding trace.csv and posterior.csv")
    plot.add_argument("--out", help="SVG path (default: <out-dir>/plot.svg)")
    plot.add_argument("--band-multiplier", type=float, default=1.96)

    live = sub.add_parser("live", help="interactive trial: enter observed outcomes on stdin")
    live.add_argument("--config", required=True)
    live.add_argument("--seed", type=_non_negative_int)
    live.add_argument("--out", help="snapshot file; resumed from if it exists, rewritten each step")
    return parser


def _load(args):
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.with_seed(args.seed)
    return config


def _to_text(writer, *args) -> str:
    buf = io.StringIO()
    writer(*args, buf)
    return buf.getvalue()


def cmd_run(args, out) -> int:
    config = _load(args)
    trace = run_design(args.design, config, stream(config.seed))
    model = fit_observations(config, trace.observations)
    out_dir = Path(args.out_dir)
    atomic_write(out_dir / "trace.csv", _to_text(write_trace_csv, trace))
    atomic_write(
        out_dir / "posterior.csv",
        _to_text(write_posterior_csv, model, config.grid, config.weights),
    )
    if args.svg:
        buf = io.StringIO()
        render_svg(model, trace, config.truth, config.weights, config.grid, buf, args.band_multiplier)
        atomic_write(out_dir / "plot.svg", buf.getvalue())
    for s in trace.steps:
        print(f"t={s.t} x={s.x!r} y={s.y!r}", file=out)
    targets = stationary_targets(model, config.grid)
    print(
        f"{args.design} trial done: n={len(trace)} seed={config.seed} rng={trace.rng_algorithm_id}",
        file=out,
    )
    print(
        f"argmax mu={targets.x_exploit} argmax dmu={targets.x_slope} argmax sigma={targets.x_explore} "
        f"true optimum={true_optimum(config.truth, config.weights.lambda1, config.grid)}",
        file=out,
    )
    print(f"wrote {out_dir}", file=out)
    return 0


def cmd_compare(args, out) -> int:
    config = _load(args)
    checkpoints = args.checkpoints or sorted({max(1, config.budget // 2), config.budget})
    bad = [t for t in checkpoints if not 1 <= t <= config.budget]
    if bad:
        raise UsageError(f"checkpoints {bad} outside 1..{config.budget}\n")
    report = compare(config, args.seeds, checkpoints, workers=args.workers)
    atomic_write(args.out, _to_text(write_comparison_csv, report))
    print(f"{args.seeds} seeds, region {DEFAULT_REGION}, adaptive vs fixed win-rates:", file=out)
    for (name, ta, tb), rate in report.win_rates.items():
        print(f"  {name:<10} adaptive t={ta:<3} fixed t={tb:<3} {rate:.2f}", file=out)
    print(f"wrote {args.out}", file=out)
    return 0


def cmd_plot(args, out) -> int:
    config = _load(args)
    out_dir = Path(args.out_dir)
    with open(out_dir / "trace.csv", encoding="utf-8") as fh:
        trace = read_trace_csv(fh)
    with open(out_dir / "posterior.csv", encoding="utf-8") as fh:
        cols = read_posterior_csv(fh)
    buf = io.StringIO()
    render_curves_svg(
        cols["x"], cols["mu"], cols["sigma"], cols["u3"],
        [(s.x, s.y) for s in trace.steps],
        config.truth, config.weights, config.grid, buf, args.band_multiplier,
    )
    target = Path(args.out) if args.out else out_dir / "plot.svg"
    atomic_write(target, buf.getvalue())
    print(f"wrote {target}", file=out)
    return 0


def cmd_live(args, out, stdin, err) -> int:
    snapshot = Path(args.out) if args.out else None
    if snapshot is not None and snapshot.exists():
        state = parse_live_state(snapshot.read_text(encoding="utf-8"), Path(args.config).parent)
        x = state.pending_x
        print(f"resumed {snapshot} at t={state.t}", file=err)
    else:
        config = _load(args)
        state, x = live_begin(config, stream(config.seed))
    while x is not None:
        if snapshot is not None:
            atomic_write(snapshot, format_live_state(state))
        print(f"t={state.t} recommend x={x!r}", file=out, flush=True)
        line = stdin.readline()
        if not line:
            if snapshot is not None:
                print(f"input closed; trial suspended in {snapshot}", file=err)
                return 0
            print("input closed before the trial finished", file=err)
            return 2
        try:
            state, x = live_step(state, line.strip())
        except NonFiniteOutcome as exc:
            print(f"rejected: {exc}; enter a finite decimal", file=err)
            continue
        print(f"recorded y={state.observations.points[-1][1]!r}", file=out, flush=True)
    if snapshot is not None:
        atomic_write(snapshot, format_live_state(state))
    model = fit_observations(state.config, state.observations)
    targets = stationary_targets(model, state.config.grid)
    print(
        f"trial complete n={len(state.observations)} argmax mu={targets.x_exploit} "
        f"argmax dmu={targets.x_slope} argmax sigma={targets.x_explore}",
        file=out,
    )
    return 0


def dispatch(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return cmd_run(args, stdout)
        if args.command == "compare":
            return cmd_compare(args, stdout)
        if args.command == "plot":
            return cmd_plot(args, stdout)
        return cmd_live(args, stdout, stdin, stderr)
    except UsageError as exc:
        stderr.write(str(exc))
        stderr.write(parser.format_help())
        return 1
    except (ParseError, ValidationError, FactorizationFailure, NonFiniteUtility, OSError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

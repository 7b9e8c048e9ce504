"""Flat ``key = value`` scenario files and live-trial snapshots.

A scenario file has one pair per line; ``#`` starts a comment.  Only
``grid.step`` and ``kernel.signal_amplitude`` have defaults.  ``warm_start``
names a two-column ``x,y`` CSV, resolved relative to the config file.

A live snapshot is a scenario block followed by ``pending_x = ...`` and an
``[observations]`` section of ``x,y`` lines.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

from .acquisition import UtilityWeights
from .gp import KernelSpec, ObservationSet
from .trial import GroundTruth, LiveState, ScenarioConfig, ValidationError

__all__ = [
    "ParseError",
    "ValidationError",
    "REQUIRED_KEYS",
    "DEFAULTS",
    "parse_config",
    "load_config",
    "format_config",
    "paper_config",
    "format_live_state",
    "parse_live_state",
    "read_observations_csv",
    "atomic_write",
]

REQUIRED_KEYS = (
    "truth.m",
    "truth.b",
    "truth.noise_std",
    "kernel.length_scale",
    "weights.lambda1",
    "weights.lambda2",
    "domain.lo",
    "domain.hi",
    "budget",
    "seed",
)
DEFAULTS = {"grid.step": "0.01", "kernel.signal_amplitude": "1.0"}
OPTIONAL_KEYS = ("warm_start",)
KNOWN_KEYS = REQUIRED_KEYS + tuple(DEFAULTS) + OPTIONAL_KEYS
INT_KEYS = ("budget", "seed")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, key: Optional[str] = None):
        where = f"line {line}" + (f" ({key})" if key else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.key = key


def _split_pairs(lines, first_line: int = 1) -> dict:
    pairs = {}
    for lineno, raw in enumerate(lines, start=first_line):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key in pairs:
            raise ParseError("duplicate key", lineno, key)
        pairs[key] = (value, lineno)
    return pairs


def _convert(key: str, value: str, lineno: int):
    if key == "warm_start":
        if not value:
            raise ParseError("empty path", lineno, key)
        return value
    try:
        if key in INT_KEYS:
            return int(value)
        number = float(value)
    except ValueError:
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ParseError(f"{value!r} is not {kind}", lineno, key) from None
    if not math.isfinite(number):
        raise ParseError(f"{value!r} is not finite", lineno, key)
    return number


def read_observations_csv(path) -> ObservationSet:
    """Two-column ``x,y`` file; an optional non-numeric header row is skipped."""
    points = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns in {path}, got {len(row)}", i + 1)
            try:
                points.append((float(row[0]), float(row[1])))
            except ValueError:
                if i == 0:
                    continue
                raise ParseError(f"non-numeric row {row} in {path}", i + 1) from None
    return ObservationSet(points)


def _build(pairs: dict, base_dir: Optional[Path]) -> ScenarioConfig:
    for key, (_, lineno) in pairs.items():
        if key not in KNOWN_KEYS:
            raise ParseError("unknown key", lineno, key)
    missing = [k for k in REQUIRED_KEYS if k not in pairs]
    if missing:
        raise ValidationError(f"missing required key(s): {', '.join(missing)}")
    values = {k: _convert(k, *pairs.get(k, (DEFAULTS.get(k), 0))) for k in KNOWN_KEYS
              if k in pairs or k in DEFAULTS}

    warm_path = values.get("warm_start")
    warm = ObservationSet()
    if warm_path is not None:
        resolved = Path(warm_path)
        if not resolved.is_absolute() and base_dir is not None:
            resolved = base_dir / resolved
        try:
            warm = read_observations_csv(resolved)
        except OSError as exc:
            raise ValidationError(f"warm_start: cannot read {resolved}: {exc.strerror}") from None
        except ValueError as exc:
            raise ValidationError(f"warm_start: {exc}") from None

    try:
        kernel = KernelSpec(values["kernel.length_scale"], values["kernel.signal_amplitude"])
        weights = UtilityWeights(values["weights.lambda1"], values["weights.lambda2"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return ScenarioConfig(
        truth=GroundTruth(values["truth.m"], values["truth.b"], values["truth.noise_std"]),
        kernel=kernel,
        weights=weights,
        domain_lo=values["domain.lo"],
        domain_hi=values["domain.hi"],
        budget=values["budget"],
        grid_step=values["grid.step"],
        seed=values["seed"],
        warm_start=warm,
        warm_start_path=warm_path,
    )


def parse_config(text: str, base_dir=None) -> ScenarioConfig:
    """Parse and validate scenario text.

    Raises ParseError (with line number and key) for malformed lines, unknown
    keys and unparseable values, ValidationError for missing keys or violated
    invariants.
    """
    return _build(_split_pairs(text.splitlines()), Path(base_dir) if base_dir else None)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


def format_config(config: ScenarioConfig) -> str:
    lines = [
        f"truth.m = {config.truth.midpoint!r}",
        f"truth.b = {config.truth.intercept!r}",
        f"truth.noise_std = {config.truth.noise_std!r}",
        f"kernel.length_scale = {config.kernel.length_scale!r}",
        f"kernel.signal_amplitude = {config.kernel.signal_amplitude!r}",
        f"weights.lambda1 = {config.weights.lambda1!r}",
        f"weights.lambda2 = {config.weights.lambda2!r}",
        f"domain.lo = {config.domain_lo!r}",
        f"domain.hi = {config.domain_hi!r}",
        f"budget = {config.budget}",
        f"grid.step = {config.grid_step!r}",
        f"seed = {config.seed}",
    ]
    if config.warm_start_path is not None:
        lines.append(f"warm_start = {config.warm_start_path}")
    return "\n".join(lines) + "\n"


def paper_config(seed: int = 0) -> ScenarioConfig:
    """The illustrated scenario: m=6, b=1, noise 0.1, l=2, weights (30, 10), [0, 12], n=12."""
    return ScenarioConfig(
        truth=GroundTruth(6.0, 1.0, 0.1),
        kernel=KernelSpec(2.0, 1.0),
        weights=UtilityWeights(30.0, 10.0),
        domain_lo=0.0,
        domain_hi=12.0,
        budget=12,
        grid_step=0.01,
        seed=seed,
    )


def format_live_state(state: LiveState) -> str:
    pending = "" if state.pending_x is None else repr(state.pending_x)
    out = [format_config(state.config).rstrip("\n"), f"pending_x = {pending}", "[observations]"]
    out += [f"{x!r},{y!r}" for x, y in state.observations]
    return "\n".join(out) + "\n"


def parse_live_state(text: str, base_dir=None) -> LiveState:
    lines = text.splitlines()
    try:
        split = next(i for i, line in enumerate(lines) if line.strip() == "[observations]")
    except StopIteration:
        raise ParseError("missing [observations] section", len(lines)) from None
    pairs = _split_pairs(lines[:split])
    pending_raw, pending_line = pairs.pop("pending_x", ("", 0))
    config = _build(pairs, Path(base_dir) if base_dir else None)
    pending = _convert("pending_x", pending_raw, pending_line) if pending_raw else None

    points = []
    for lineno, raw in enumerate(lines[split + 1:], start=split + 2):
        if not raw.strip():
            continue
        try:
            x, y = (float(v) for v in raw.split(","))
        except ValueError:
            raise ParseError(f"expected 'x,y', got {raw.strip()!r}", lineno) from None
        points.append((x, y))
    observations = ObservationSet(points)
    if not observations.within(config.domain_lo, config.domain_hi):
        raise ValidationError("snapshot observations lie outside the domain")
    if len(observations) > config.budget:
        raise ValidationError("snapshot holds more observations than the budget")
    return LiveState(config, observations, pending)


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise

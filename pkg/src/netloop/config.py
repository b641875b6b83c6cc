"""Experiment configuration: JSON schema, defaults, and validation.

A configuration document describes one experiment: the shared network, the
plant fleet (with a ``repeat`` count so homogeneous groups don't have to be
spelled out loop by loop), which regimes to run, Monte Carlo controls, and
solver/output knobs.  Everything is validated here so the simulation layer
can assume well-formed inputs, and every rejection names the offending
field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import NetworkModel, PlantModel
from .errors import ConfigurationError
from .milp import SolverOptions

__all__ = [
    "REGIMES",
    "ExperimentConfig",
    "OutputOptions",
    "load_config",
    "parse_config",
]

REGIMES = (
    "AwareImpassive",
    "AwareReactive",
    "AgnosticImpassive",
    "AgnosticReactive",
    "DelayInsensitive",
)


@dataclass(frozen=True)
class OutputOptions:
    directory: Path = Path("out")
    emit_svg: bool = False
    trace_replications: int = 10   # how many replications land in trace.csv


@dataclass(frozen=True)
class ExperimentConfig:
    horizon: int
    replications: int
    seed: int
    regimes: tuple
    network: NetworkModel
    models: tuple
    weights: tuple          # delay-insensitive priorities, sums to 1
    solver: SolverOptions
    max_reported_gap: float | None
    outputs: OutputOptions

    @property
    def n_loops(self) -> int:
        return len(self.models)

    def tolerances(self) -> list:
        return [(m.alpha, m.beta) for m in self.models]


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ConfigurationError(f"{where}: missing required field {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigurationError(
            f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, "
            f"got {type(value).__name__}")
    return value


def _optional(doc: dict, key: str, kind, default, where: str):
    if key not in doc or doc[key] is None:
        return default
    return _require(doc, key, kind, where)


def _parse_subsystems(items, where: str) -> tuple:
    if not isinstance(items, list) or not items:
        raise ConfigurationError(f"{where}: need a non-empty list")
    models = []
    for pos, entry in enumerate(items):
        here = f"{where}[{pos}]"
        if not isinstance(entry, dict):
            raise ConfigurationError(f"{here}: expected an object")
        repeat = _optional(entry, "repeat", int, 1, here)
        if repeat < 1:
            raise ConfigurationError(f"{here}.repeat: must be >= 1")
        sigma_w = _require(entry, "sigma_w", list, here)
        fields = dict(
            A=_require(entry, "A", list, here),
            B=_require(entry, "B", list, here),
            Q1=_require(entry, "Q1", list, here),
            Q2=_require(entry, "Q2", list, here),
            R=_require(entry, "R", list, here),
            sigma_w=sigma_w,
            # the initial-state spread defaults to the disturbance spread
            sigma_x0=_optional(entry, "sigma_x0", list, sigma_w, here),
            alpha=_require(entry, "alpha", int, here),
            beta=_require(entry, "beta", int, here),
        )
        mean = _optional(entry, "mean_x0", list, None, here)
        if mean is None:
            mean = [0.0] * len(fields["A"])
        fields["mean_x0"] = mean
        for _ in range(repeat):
            try:
                models.append(PlantModel(index=len(models), **fields))
            except ConfigurationError as exc:
                raise ConfigurationError(f"{here}: {exc}") from exc
    return tuple(models)


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a decoded JSON document into an ExperimentConfig.

    A relative ``outputs.dir`` is kept relative, so artifacts land under
    the caller's working directory — bundled configs stay read-only.
    """
    if not isinstance(doc, dict):
        raise ConfigurationError("config: top level must be an object")

    horizon = _require(doc, "horizon", int, "config")
    if horizon < 1:
        raise ConfigurationError("config.horizon: must be >= 1")
    replications = _require(doc, "replications", int, "config")
    if replications < 1:
        raise ConfigurationError("config.replications: must be >= 1")
    seed = _require(doc, "seed", int, "config")

    regimes = _require(doc, "regimes", list, "config")
    if not regimes:
        raise ConfigurationError("config.regimes: need at least one regime")
    for r in regimes:
        if r not in REGIMES:
            raise ConfigurationError(
                f"config.regimes: unknown regime {r!r}; known: {', '.join(REGIMES)}")
    if len(set(regimes)) != len(regimes):
        raise ConfigurationError("config.regimes: duplicates not allowed")

    net_doc = _require(doc, "network", dict, "config")
    max_delay = _require(net_doc, "D", int, "config.network")
    prices = _require(net_doc, "prices", list, "config.network")
    capacities = _require(net_doc, "capacities", list, "config.network")
    try:
        network = NetworkModel(max_delay=max_delay, prices=prices,
                               capacities=capacities)
    except ConfigurationError as exc:
        raise ConfigurationError(f"config.network: {exc}") from exc

    models = _parse_subsystems(_require(doc, "subsystems", list, "config"),
                               "config.subsystems")
    n = len(models)

    weights_doc = _optional(doc, "weights", list, None, "config")
    if weights_doc is None:
        weights = tuple(1.0 / n for _ in range(n))
    else:
        if len(weights_doc) != n:
            raise ConfigurationError(
                f"config.weights: need {n} entries (one per loop), "
                f"got {len(weights_doc)}")
        weights = tuple(float(w) for w in weights_doc)
        if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ConfigurationError(
                "config.weights: entries must be positive and sum to 1")

    sol_doc = _optional(doc, "solver", dict, {}, "config")
    closure = _optional(sol_doc, "reactiveClosure", str, "optimistic",
                        "config.solver")
    if closure != "optimistic":
        # the only implemented model of unknown future grants: the plan
        # assumes it will be granted what it requests
        raise ConfigurationError(
            "config.solver.reactiveClosure: only 'optimistic' is supported")
    solver = SolverOptions(
        time_limit=_optional(sol_doc, "timeLimitSeconds", float, None,
                             "config.solver"),
        exact_threshold=_optional(sol_doc, "exactThreshold", int, 600,
                                  "config.solver"),
    )
    max_gap = _optional(sol_doc, "maxReportedGap", float, None, "config.solver")
    if max_gap is not None and max_gap < 0:
        raise ConfigurationError("config.solver.maxReportedGap: must be >= 0")

    out_doc = _optional(doc, "outputs", dict, {}, "config")
    directory = Path(_optional(out_doc, "dir", str, "out", "config.outputs"))
    outputs = OutputOptions(
        directory=directory,
        emit_svg=_optional(out_doc, "emitSvg", bool, False, "config.outputs"),
        trace_replications=_optional(out_doc, "traceReplications", int, 10,
                                     "config.outputs"),
    )
    if outputs.trace_replications < 0:
        raise ConfigurationError("config.outputs.traceReplications: must be >= 0")

    return ExperimentConfig(horizon=horizon, replications=replications,
                            seed=seed, regimes=tuple(regimes),
                            network=network, models=models, weights=weights,
                            solver=solver, max_reported_gap=max_gap,
                            outputs=outputs)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)

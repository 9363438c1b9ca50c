"""Cost-aware workflow scheduling.

Problems, schedules, models and reports are plain dicts shaped like the
JSON documents the command-line tool reads and writes. Run records are CSV
text with the fixed header.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional, Sequence

from . import _core
from ._core import (
    BadEnum,
    DegenerateDesign,
    Error,
    MissingFeature,
    Overcount,
    ParseError,
    SchemaError,
    TooFewSamples,
    TooLarge,
    UnknownChoice,
    ValidationFailed,
    ZeroElapsed,
    ZeroInitialCost,
    ZeroTotal,
    compute_ccr,
    compute_reliability,
    compute_throughput,
    regression_metrics,
    tiered_cost,
)

__all__ = [
    "BadEnum",
    "DegenerateDesign",
    "Error",
    "MissingFeature",
    "Overcount",
    "ParseError",
    "SchemaError",
    "TooFewSamples",
    "TooLarge",
    "UnknownChoice",
    "ValidationFailed",
    "ZeroElapsed",
    "ZeroInitialCost",
    "ZeroTotal",
    "brute_force",
    "compute_ccr",
    "compute_reliability",
    "compute_throughput",
    "earliest_schedule",
    "evaluate_cost",
    "fit",
    "generate_problem",
    "generate_records",
    "normalize_problem",
    "predict_durations",
    "regression_metrics",
    "report",
    "run_cli",
    "solve",
    "tiered_cost",
    "tune",
    "validate",
]

Doc = Mapping[str, Any]
Choices = Mapping[str, Sequence[str]]


def _text(doc: Doc | str) -> str:
    return doc if isinstance(doc, str) else json.dumps(doc)


def _pairs(assignment: Choices) -> dict[str, tuple[str, str]]:
    return {w: (c[0], c[1]) for w, c in assignment.items()}


def validate(problem: Doc | str) -> dict:
    """Every invariant the problem breaks, or ``{"valid": True, "issues": []}``."""
    return _core.validate(_text(problem))


def normalize_problem(problem: Doc | str) -> dict:
    return json.loads(_core.normalize_problem(_text(problem)))


def solve(
    problem: Doc | str,
    *,
    time_limit: float = 60.0,
    node_limit: int = 1_000_000,
    gap: float = 1e-6,
) -> Optional[dict]:
    """Schedule document for the cheapest feasible assignment; None if there is none."""
    out = _core.solve(_text(problem), time_limit, node_limit, gap)
    return None if out is None else json.loads(out)


def brute_force(problem: Doc | str) -> Optional[dict]:
    out = _core.brute_force(_text(problem))
    return None if out is None else json.loads(out)


def evaluate_cost(problem: Doc | str, assignment: Choices) -> dict:
    return _core.evaluate_cost(_text(problem), _pairs(assignment))


def earliest_schedule(problem: Doc | str, assignment: Choices) -> dict:
    return _core.earliest_schedule(_text(problem), _pairs(assignment))


def fit(records: str, family: str = "ridge", alpha: float = 1.0, l1_ratio: float = 0.5) -> dict:
    return json.loads(_core.fit(records, family, alpha, l1_ratio))


def tune(
    records: str,
    family: str = "ridge",
    *,
    l1_ratio: float = 0.5,
    folds: int = 5,
    seed: Optional[int] = None,
) -> dict:
    return json.loads(_core.tune(records, family, l1_ratio, folds, seed))


def predict_durations(model: Doc | str, problem: Doc | str) -> dict:
    return json.loads(_core.predict_durations(_text(model), _text(problem)))


def generate_problem(
    seed: int = 0,
    *,
    workflows: int = 6,
    devices: int = 3,
    configs: int = 3,
    density: float = 0.3,
    slack: float = 1.5,
) -> dict:
    return json.loads(_core.generate_problem(seed, workflows, devices, configs, density, slack))


def generate_records(count: int = 5000, seed: int = 0, noise: float = 60.0) -> str:
    return _core.generate_records(count, seed, noise)


def report(run_log: Doc | str) -> dict:
    return json.loads(_core.report(_text(run_log)))


def run_cli(args: Sequence[str]) -> tuple[int, str, str]:
    """Runs the command-line tool in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli(list(args))

"""Experiment reports and curve emission.

report.json and curves.csv must be byte-identical across reruns with the
same config and seed, so wall-clock timings live on the in-memory report
only and are excluded from serialization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..likelihood import NEG_INF, LogLikelihoodCurve

SCHEMA_VERSION = 1


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    experiment: str
    seed: int
    tolerance: float
    checks: list[CheckResult] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    runtime_seconds: float | None = None   # console only, never serialized

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> None:
        self.checks.append(CheckResult(name=name, passed=bool(passed), detail=detail))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": _jsonable(c.detail)}
                for c in self.checks
            ],
            "metrics": _jsonable(self.metrics),
        }


def _jsonable(value):
    """JSON-safe copy: infinities to strings, numpy scalars to floats."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(v) for v in items]
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, str)) or value is None:
        return value
    value = float(value)
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    if math.isnan(value):
        return "nan"
    return value


def write_report_json(report: Report, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    path.write_text(text + "\n")


def _format_value(v: float) -> str:
    if v == NEG_INF:
        return "-inf"
    return repr(float(v))


def _format_theta(theta) -> str:
    if isinstance(theta, tuple):
        return ";".join(repr(float(t)) for t in theta)
    return repr(float(theta))


def emit_curves(curve1: LogLikelihoodCurve, curve2: LogLikelihoodCurve, path) -> None:
    """CSV with columns theta, <id1>, <id2>, diff in full double precision."""
    if curve1.thetas != curve2.thetas:
        raise ValueError("curves do not share a theta grid")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"theta,{curve1.measure_id},{curve2.measure_id},diff"]
    for theta, v1, v2 in zip(curve1.thetas, curve1.values, curve2.values):
        if v1 == NEG_INF and v2 == NEG_INF:
            diff = "nan"
        elif v1 == NEG_INF:
            diff = "-inf"
        elif v2 == NEG_INF:
            diff = "inf"
        else:
            diff = repr(float(v1 - v2))
        lines.append(f"{_format_theta(theta)},{_format_value(v1)},{_format_value(v2)},{diff}")
    path.write_text("\n".join(lines) + "\n")

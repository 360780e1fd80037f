"""Check rows, report sections and their JSON / plain-text renderings."""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from config import REPORT_SCHEMA_VERSION, SUITES, TOOLKIT_VERSION

PROVENANCES = ("analytic", "derived", "monte-carlo", "trivial")


@dataclass
class CheckRow:
    """One claim compared with its expected value.

    ``comparison`` is "abs" (|value - expected| <= tolerance), "below"
    (value < expected), "above" (value > expected) or "equal".
    """

    claim: str
    anchor: str
    value: object
    expected: object
    provenance: str
    comparison: str = "abs"
    tolerance: float = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def passed(self):
        if self.comparison == "abs":
            return bool(abs(self.value - self.expected) <= self.tolerance)
        if self.comparison == "below":
            return bool(self.value < self.expected)
        if self.comparison == "above":
            return bool(self.value > self.expected)
        return self.value == self.expected

    def as_dict(self):
        return {
            "claim": self.claim,
            "anchor": self.anchor,
            "value": self.value,
            "expected": self.expected,
            "provenance": self.provenance,
            "comparison": self.comparison,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def close(claim, anchor, value, expected, tol, provenance="analytic"):
    return CheckRow(claim, anchor, float(value), float(expected), provenance, "abs", float(tol))


def equal(claim, anchor, value, expected, provenance="trivial"):
    return CheckRow(claim, anchor, value, expected, provenance, "equal")


def below(claim, anchor, value, bound, provenance="derived"):
    return CheckRow(claim, anchor, float(value), float(bound), provenance, "below")


def above(claim, anchor, value, bound, provenance="derived"):
    return CheckRow(claim, anchor, float(value), float(bound), provenance, "above")


@dataclass
class Section:
    name: str
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    wall_time: float = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


@dataclass
class VerificationReport:
    seed: int
    sections: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(s.passed for s in self.sections)

    def ordered(self):
        rank = {name: i for i, name in enumerate(SUITES)}
        return sorted(self.sections, key=lambda s: rank.get(s.name, len(rank)))

    def to_dict(self, timings=False):
        sections = []
        for s in self.ordered():
            entry = {
                "name": s.name,
                "status": "pass" if s.passed else "fail",
                "parameters": s.parameters,
                "checks": [c.as_dict() for c in s.checks],
                "tables": {name: table.to_dict(orient="records") for name, table in s.tables.items()},
                "notes": list(s.notes),
            }
            if timings:
                entry["wall_time"] = s.wall_time
            sections.append(entry)
        return jsonable(
            {
                "schema_version": REPORT_SCHEMA_VERSION,
                "toolkit_version": TOOLKIT_VERSION,
                "status": "pass" if self.passed else "fail",
                "metadata": {"seed": self.seed, "config": self.config},
                "sections": sections,
            }
        )


def jsonable(obj):
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def render_json(report, timings=False):
    return json.dumps(report.to_dict(timings), indent=2, sort_keys=True, ensure_ascii=False)


def _short(value):
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_short(v) for v in value) + "]"
    return str(value)


def render_text(report, timings=False):
    lines = []
    for s in report.ordered():
        header = f"== {s.name}: {'PASS' if s.passed else 'FAIL'}"
        if timings and s.wall_time is not None:
            header += f" ({s.wall_time:.2f} s)"
        lines.append(header)
        if s.checks:
            frame = pd.DataFrame(
                [
                    {
                        "claim": c.claim,
                        "value": _short(c.value),
                        "expected": _short(c.expected),
                        "tol": "" if c.tolerance is None else f"{c.tolerance:.0e}",
                        "source": c.provenance,
                        "ok": "yes" if c.passed else "NO",
                    }
                    for c in s.checks
                ]
            )
            lines.append(frame.to_string(index=False))
        lines.extend(s.notes)
        lines.append("")
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'} (seed {report.seed})")
    return "\n".join(lines)


def render(report, fmt="json", timings=False):
    return render_json(report, timings) if fmt == "json" else render_text(report, timings)

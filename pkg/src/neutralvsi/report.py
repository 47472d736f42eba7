"""Verification report: per-check verdicts, JSON and plain-text rendering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__


def plain(x):
    """JSON-safe copy with deterministic number formatting."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction) or type(x).__name__ == "mpq":
        return float(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float | None = None
    details: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed), "max_residual": plain(self.max_residual),
               "details": plain(self.details)}
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class VerificationReport:
    family: str
    mode: str
    order: int
    seed: int
    tol: float
    points: list
    checks: list = field(default_factory=list)
    tool_version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def errored(self) -> bool:
        return any(c.error for c in self.checks)

    def add(self, c: CheckResult):
        self.checks.append(c)

    def to_dict(self) -> dict:
        return {
            "tool": "neutralvsi",
            "tool_version": self.tool_version,
            "family": self.family,
            "mode": self.mode,
            "order": self.order,
            "seed": self.seed,
            "tol": self.tol,
            "points": [{k: str(v) for k, v in p.items()} for p in self.points],
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        rows = [("check", "verdict", "max residual")]
        for c in self.checks:
            verdict = "ERROR" if c.error else ("pass" if c.passed else "FAIL")
            res = "-" if c.max_residual is None else f"{float(c.max_residual):.3e}"
            rows.append((c.name, verdict, res))
        w = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [f"family {self.family}  mode {self.mode}  order {self.order}  "
                 f"points {len(self.points)}  seed {self.seed}"]
        for i, r in enumerate(rows):
            lines.append("  ".join(s.ljust(w[j]) for j, s in enumerate(r)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * n for n in w))
        for c in self.checks:
            if c.error:
                lines.append(f"{c.name}: {c.error}")
        lines.append("overall: " + ("pass" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"

"""Residual reports shared by validation, the identity suites and the CLI."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class CheckResult:
    label: str
    anchor: str
    residual: float
    tol: float
    passed: bool
    points: int
    ms: float | None = None
    detail: str = field(default="", compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "label": self.label,
            "anchor": self.anchor,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.passed,
            "points": self.points,
            "ms": round(self.ms, 3) if (timing and self.ms is not None) else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CheckResult:
        return cls(d["label"], d["anchor"], d["residual"], d["tol"], d["pass"], d["points"], d["ms"])


def max_abs(values) -> float:
    """Largest absolute entry over a (possibly nested) list of arrays; NaN counts as infinite."""
    worst = 0.0
    stack = [values]
    while stack:
        v = stack.pop()
        if isinstance(v, (list, tuple)):
            stack.extend(v)
            continue
        a = np.abs(np.asarray(v, dtype=float))
        if a.size:
            if np.isnan(a).any():
                return float("inf")
            worst = max(worst, float(a.max()))
    return worst


def check(label: str, anchor: str, tol: float, points: int, compute: Callable[[], float], detail: str = "") -> CheckResult:
    """Time ``compute`` and wrap its residual; a raised exception yields an infinite residual."""
    start = time.perf_counter()
    try:
        out = compute()
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        out, detail = float("inf"), f"{type(exc).__name__}: {exc}"
    if isinstance(out, tuple):
        residual, detail = out
    else:
        residual = out
    ms = (time.perf_counter() - start) * 1e3
    residual = float(residual)
    return CheckResult(label, anchor, residual, tol, bool(residual < tol), points, ms, detail)


@dataclass
class SuiteReport:
    suite: str
    seed: int | None
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: SuiteReport) -> SuiteReport:
        self.checks.extend(other.checks)
        return self

    def sorted_checks(self) -> list[CheckResult]:
        return sorted(self.checks, key=lambda c: (c.anchor, c.label))

    def anchors(self) -> set[str]:
        return {c.anchor for c in self.checks}

    def to_dict(self, timing: bool = True) -> dict:
        return {"suite": self.suite, "seed": self.seed, "checks": [c.to_dict(timing) for c in self.sorted_checks()]}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> SuiteReport:
        d = json.loads(text)
        return cls(d["suite"], d["seed"], [CheckResult.from_dict(c) for c in d["checks"]])

    def to_text(self, timing: bool = True) -> str:
        lines = [f"suite {self.suite} (seed {self.seed})"]
        for c in self.sorted_checks():
            flag = "PASS" if c.passed else "FAIL"
            ms = f" {c.ms:8.1f} ms" if (timing and c.ms is not None) else ""
            rel = "<" if c.passed else ">="
            lines.append(f"  [{flag}] {c.anchor:<34} {c.label:<48} residual {c.residual:.3e} {rel} {c.tol:.0e}  n={c.points}{ms}")
            if c.detail and not c.passed:
                lines.append(f"         {c.detail}")
        total = len(self.checks)
        ok = sum(c.passed for c in self.checks)
        lines.append(f"{ok}/{total} checks passed")
        return "\n".join(lines)

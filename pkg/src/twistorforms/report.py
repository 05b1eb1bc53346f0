"""Check records and suite reports with a stable JSON/CSV rendering."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

__all__ = ["Check", "SuiteReport", "SCHEMA_VERSION", "sci", "check_max", "to_json", "to_csv"]

SCHEMA_VERSION = 1


def sci(x: float) -> str:
    """Six significant digits in scientific notation."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.5e}"


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    max_residual: float
    tolerance: float
    skipped: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return bool(math.isfinite(self.max_residual) and self.max_residual <= self.tolerance)

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status} {self.name}: {sci(self.max_residual)} (tol {sci(self.tolerance)})"


def check_max(name: str, anchor: str, residuals: Iterable[float], tol: float, note: str = "") -> Check:
    vals = [float(r) for r in residuals]
    worst = max(vals) if vals else float("nan")
    return Check(name, anchor, worst, tol, note=note)


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "config": self.config,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "anchor": c.anchor,
                    "max_residual": c.max_residual,
                    "tolerance": c.tolerance,
                    "pass": c.passed,
                    "skipped": c.skipped,
                    **({"note": c.note} if c.note else {}),
                }
                for c in self.checks
            ],
            "wall_time": self.wall_time,
        }


def _render_numbers(obj, table: dict):
    """Swap floats for placeholders so they can be written in fixed sci notation."""
    if isinstance(obj, dict):
        return {k: (v if k == "wall_time" else _render_numbers(v, table)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_render_numbers(v, table) for v in obj]
    if isinstance(obj, float):
        key = f"@@num{len(table)}@@"
        table[key] = sci(obj)
        return key
    return obj


def to_json(payload: dict) -> str:
    table: dict = {}
    text = json.dumps(_render_numbers(payload, table), indent=2, ensure_ascii=False)
    for key, val in table.items():
        text = text.replace(f'"{key}"', val)
    return text + "\n"


def to_csv(reports: Iterable[SuiteReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "name", "anchor", "residual", "tol", "pass"])
    for r in reports:
        for c in r.checks:
            w.writerow([r.suite, c.name, c.anchor, sci(c.max_residual), sci(c.tolerance),
                        "skip" if c.skipped else str(c.passed).lower()])
    return buf.getvalue()

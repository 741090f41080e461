"""Suite reports and seeded generators."""
from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

DEFAULT_SEED = 0


def default_seed() -> int:
    raw = os.environ.get("MAVALTK_SEED")
    return int(raw) if raw not in (None, "") else DEFAULT_SEED


def case_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent 64-bit generators, one per case, split from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _jsonable(v: Any) -> Any:
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class Case:
    description: str
    expected: Any
    actual: Any
    tolerance: float | None
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "expected": _jsonable(self.expected),
            "actual": _jsonable(self.actual),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    suite: str
    seed: int
    config: dict = field(default_factory=dict)
    cases: list[Case] = field(default_factory=list)
    runtime: float = 0.0
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def add(self, description: str, expected, actual, tolerance: float | None, passed: bool, detail: str = "") -> Case:
        case = Case(description, expected, actual, tolerance, bool(passed), detail)
        self.cases.append(case)
        return case

    def close(self) -> SuiteReport:
        self.runtime = time.perf_counter() - self._t0
        return self

    def check_close(self, description: str, expected, actual, tol: float, relative: bool = True, detail: str = "") -> Case:
        """Pass when |actual - expected| <= tol (times max(1, |expected|) if relative)."""
        err = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected)))) if np.size(expected) else 0.0
        scale = max(1.0, float(np.max(np.abs(expected)))) if relative and np.size(expected) else 1.0
        return self.add(description, expected, actual, tol, err <= tol * scale, detail or f"err={err:.3g}")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[Case]:
        return [c for c in self.cases if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "config": _jsonable(self.config),
            "runtime": self.runtime,
            "pass": self.passed,
            "cases": [c.to_dict() for c in self.cases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        lines = [f"suite {self.suite}  seed={self.seed}  config={_jsonable(self.config)}"]
        width = max([len(c.description) for c in self.cases] + [10])
        for c in self.cases:
            lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.description:<{width}}  {c.detail}")
        lines.append(f"  {sum(c.passed for c in self.cases)}/{len(self.cases)} passed in {self.runtime:.2f}s")
        return "\n".join(lines)

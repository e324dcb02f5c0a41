"""Verification reports shared by thicken, moser and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


def plain(value: Any) -> Any:
    """Convert a value into JSON-ready data (Fractions become "p/q" strings)."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return float(value)
    if hasattr(value, "tolist"):
        return plain(value.tolist())
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return str(value)


@dataclass
class Check:
    """One verified conclusion.

    ``residual`` is a float for numerical checks and None for exact ones.
    ``worst_point`` is the sample that produced the largest residual or the
    first counterexample.
    """

    name: str
    passed: bool
    residual: float | None = None
    worst_point: Any = None
    witness: Any = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed)}
        if self.residual is None:
            out["verdict"] = "exact-pass" if self.passed else "exact-fail"
        else:
            out["residual"] = float(self.residual)
        out["worst_point"] = plain(self.worst_point)
        if self.witness is not None:
            out["witness"] = plain(self.witness)
        if self.detail:
            out["detail"] = plain(self.detail)
        return out


@dataclass
class EquivalenceReport:
    stage: str
    checks: list = field(default_factory=list)
    box: Any = None
    grid: int | None = None
    steps: int | None = None
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "passed": self.passed,
            "box": plain(self.box),
            "grid": self.grid,
            "steps": self.steps,
            "checks": [c.to_dict() for c in self.checks],
            "info": plain(self.info),
        }

"""Shared audit-report types, JSON-ready."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class AxiomCheck:
    name: str
    max_residual: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {"name": self.name, "max_residual": float(self.max_residual),
                "tol": float(self.tol), "passed": bool(self.passed),
                "detail": self.detail}

    def line(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: max residual {self.max_residual:.3e} (tol {self.tol:.1e})"


@dataclass
class VerificationReport:
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def worst(self) -> Optional[AxiomCheck]:
        failing = [c for c in self.checks if not c.passed]
        pool = failing or self.checks
        return max(pool, key=lambda c: c.max_residual) if pool else None

    def add(self, name, max_residual, tol, detail="") -> AxiomCheck:
        check = AxiomCheck(name, float(max_residual), float(tol), detail)
        self.checks.append(check)
        return check

    def to_dict(self) -> dict:
        return {"title": self.title, "passed": bool(self.passed),
                "checks": [c.to_dict() for c in self.checks]}

    def summary(self) -> str:
        lines = [self.title] + ["  " + c.line() for c in self.checks]
        return "\n".join(lines)

"""A single verified identity or comparison, shared by value reports and run reports."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    passed: bool
    oracle: Optional[float] = None
    tolerance: Optional[float] = None
    note: str = ""

    @property
    def deviation(self) -> Optional[float]:
        if self.oracle is None:
            return None
        return abs(self.value - self.oracle)

    @classmethod
    def residual(cls, name: str, residual: float, tol: float, note: str = "") -> "Check":
        """Identity check: passes when the residual norm is below ``tol``."""
        residual = float(residual)
        return cls(name, residual, bool(residual < tol), None, tol, note)

    @classmethod
    def compare(cls, name: str, value: float, oracle: float, tol: float, note: str = "") -> "Check":
        value, oracle = float(value), float(oracle)
        return cls(name, value, bool(abs(value - oracle) < tol), oracle, tol, note)

    @classmethod
    def exceeds(cls, name: str, value: float, threshold: float, note: str = "") -> "Check":
        """Witness check: passes when ``value`` is strictly above ``threshold``."""
        value = float(value)
        return cls(name, value, bool(value > threshold), None, threshold, note)

    @classmethod
    def flag(cls, name: str, ok: bool, note: str = "") -> "Check":
        return cls(name, 1.0 if ok else 0.0, bool(ok), None, None, note)

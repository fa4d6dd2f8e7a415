"""Verification records and the float comparison policy used by every check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

# Relative slack for comparing two floating-point sides of an inequality.
REL_TOL = 1e-9


def holds(lower: float, upper: float, rel_tol: float = REL_TOL) -> bool:
    """Return True when ``lower <= upper`` up to round-off."""
    if math.isinf(upper) and upper > 0:
        return True
    if math.isinf(lower) and lower < 0:
        return True
    scale = max(1.0, abs(lower), abs(upper))
    return lower <= upper + rel_tol * scale


@dataclass(frozen=True)
class VerificationRecord:
    """Outcome of one inequality or identity check.

    ``lhs`` and ``rhs`` are the two compared quantities, oriented so the
    check asserts ``lhs >= rhs`` (lower bounds) unless ``relation`` says
    otherwise. A vacuous record passed because its hypothesis is void, for
    instance a lower bound that is nonpositive.
    """

    name: str
    passed: bool
    lhs: Any = None
    rhs: Any = None
    relation: str = ">="
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "lhs": jsonable(self.lhs),
            "rhs": jsonable(self.rhs),
            "relation": self.relation,
            "vacuous": bool(self.vacuous),
            "details": {k: jsonable(v) for k, v in sorted(self.details.items())},
        }


def jsonable(value):
    """Convert numpy scalars, fractions and non-finite floats for JSON output."""
    from fractions import Fraction

    import numpy as np

    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return value
    return value

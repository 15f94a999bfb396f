from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .quadrature import QuadratureResult


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one numeric identity check.

    ``abs_err`` is always ``|target - computed|``; ``rel_err`` divides by
    ``|target|`` unless the target is zero, in which case it equals ``abs_err``.
    """

    target: float
    computed: float
    abs_err: float
    rel_err: float
    quadrature: Optional[QuadratureResult] = None
    label: str = ""
    notes: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, target, computed, quadrature=None, label="", **notes):
        target = float(target)
        computed = float(computed)
        abs_err = abs(target - computed)
        rel_err = abs_err / abs(target) if target != 0.0 else abs_err
        return cls(target, computed, abs_err, rel_err, quadrature, label, dict(notes))

    def passed(self, tol: float, relative: bool = True) -> bool:
        err = self.rel_err if relative else self.abs_err
        return bool(math.isfinite(err) and err <= tol)

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "target": self.target,
            "computed": self.computed,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
        }
        if self.quadrature is not None:
            out["quad_error_estimate"] = float(abs(self.quadrature.error_estimate))
            out["quad_evaluations"] = self.quadrature.evaluations
        return out

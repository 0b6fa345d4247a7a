"""Three-valued membership verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .extreal import fmt


class Verdict(str, Enum):
    IN = "in"
    OUT = "out"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Trit:
    """Verdict with the signed margin that decided it.

    Negative or zero margins favour ``in``; ``diagnostics`` explains
    ``unknown`` outcomes.
    """

    verdict: Verdict
    margin: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def is_in(self) -> bool:
        return self.verdict is Verdict.IN

    @property
    def is_out(self) -> bool:
        return self.verdict is Verdict.OUT

    @classmethod
    def from_margin(cls, margin: float, tol: float, diagnostics=None):
        """``in`` when margin <= tol, ``out`` beyond 3*tol, else ``unknown``."""
        if margin <= tol:
            v = Verdict.IN
        elif margin > 3.0 * tol:
            v = Verdict.OUT
        else:
            v = Verdict.UNKNOWN
        return cls(v, float(margin), dict(diagnostics or {}))

    def to_json(self) -> dict:
        m = self.margin
        return {"verdict": self.verdict.value, "margin": m if math.isfinite(m) else fmt(m),
                "diagnostics": dict(self.diagnostics)}

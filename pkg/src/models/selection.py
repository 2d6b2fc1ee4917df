"""Parameters and diagnostics of the channel-selection templates"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from src.utils.errors import InvariantViolation, ValidationError

MODES = ("threshold", "recyclable", "disposable", "graft")


@dataclass
class SelectionParams:
    """Depth, round step and constants of one selection run."""
    n: int
    s: int
    mode: str
    eps: float
    ln_delta: float
    upsilon: Optional[float] = None
    beta_p: Optional[float] = None
    mu_p: Optional[float] = None
    mu_star: Optional[float] = None
    n_rat: Optional[int] = None
    recruit_exponent: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown selection mode {self.mode!r}")
        if self.n < 0 or self.s < 1:
            raise ValidationError(f"need n >= 0 and s >= 1, got n={self.n}, s={self.s}")
        if not (0.0 < self.eps < 1.0):
            raise ValidationError(f"eps must lie in (0, 1), got {self.eps}")
        if not (self.ln_delta < 0.0):
            raise ValidationError(f"delta must lie in (0, 1), got ln delta = {self.ln_delta}")
        if self.mode in ("disposable", "graft"):
            missing = [name for name in ("beta_p", "mu_p", "mu_star", "n_rat")
                       if getattr(self, name) is None]
            if missing:
                raise ValidationError(f"{self.mode} selection needs {', '.join(missing)}")
        if self.recruit_exponent is None:
            self.recruit_exponent = 1.0 / 3.0 if self.mode in ("disposable", "graft") else 2.0 / 3.0

    @property
    def delta(self) -> float:
        return math.exp(self.ln_delta)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class RoundRecord:
    """Measures of the recruit, train and retain sets of one round."""
    m: int
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    e: Fraction
    e0: Fraction
    g: Fraction
    a0: Optional[Fraction] = None
    f: Optional[Fraction] = None
    note: str = ""

    def to_row(self) -> dict:
        row = {"m": self.m, "a": float(self.a), "b": float(self.b), "c": float(self.c),
               "d": float(self.d), "e": float(self.e), "e0": float(self.e0),
               "f": float(self.f) if self.f is not None else float("nan"),
               "g": float(self.g), "note": self.note}
        return row


@dataclass
class SelectionDiagnostics:
    """Per-round measures plus the vertex sets they were computed from.

    recruits[m] and retained[m] hold node ids of A_m and E_m.
    """
    mode: str
    capacity: Fraction
    rounds: List[RoundRecord] = field(default_factory=list)
    recruits: Dict[int, np.ndarray] = field(default_factory=dict)
    retained: Dict[int, np.ndarray] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def verify(self) -> None:
        """
        Check b = a, c + d + e = b, the e0 and a0 telescoping and g = I - e0.

        Raises:
            InvariantViolation: an identity fails
        """
        e0 = Fraction(0)
        a0 = Fraction(0)
        for r in self.rounds:
            if r.b != r.a:
                raise InvariantViolation(f"round {r.m}: b = {r.b} differs from a = {r.a}")
            if r.c + r.d + r.e != r.b:
                raise InvariantViolation(f"round {r.m}: c + d + e != b")
            e0 += r.e
            if r.e0 != e0:
                raise InvariantViolation(f"round {r.m}: e0 does not telescope")
            if r.g != self.capacity - r.e0:
                raise InvariantViolation(f"round {r.m}: g != I(W) - e0")
            if r.a0 is not None:
                a0 += r.a
                if r.a0 != a0 or r.f != self.capacity - r.a0:
                    raise InvariantViolation(f"round {r.m}: a0/f bookkeeping broken")

    def to_rows(self) -> List[dict]:
        return [r.to_row() for r in self.rounds]

    @property
    def retained_measure(self) -> Fraction:
        return self.rounds[-1].e0 if self.rounds else Fraction(0)

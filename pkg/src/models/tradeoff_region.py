"""Tradeoff region and feasibility verdict models"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np


@dataclass
class FeasibilityResult:
    """Verdict of the (beta', mu') feasibility predicate.

    margin is the minimum over the pi grid of RHS - LHS; it is -inf when a
    denominator mu' - pi mu* is not positive.
    """
    feasible: bool
    margin: float
    p0_ok: bool
    worst_pi: float
    method: str = "exact"

    def __bool__(self) -> bool:
        return self.feasible

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "margin": self.margin, "p0_ok": self.p0_ok,
                "worst_pi": self.worst_pi, "method": self.method}


@dataclass
class TradeoffRegion:
    """Boundary polyline of achievable (beta', 1/mu') pairs."""
    label: str
    betas: np.ndarray
    inv_mus: np.ndarray
    method: str
    ell: int
    mu_star: float
    margins: Optional[np.ndarray] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=float)
        self.inv_mus = np.asarray(self.inv_mus, dtype=float)
        if self.margins is not None:
            self.margins = np.asarray(self.margins, dtype=float)

    def at(self, beta: float) -> float:
        """Boundary height at beta by linear interpolation (0 past the last point)."""
        return float(np.interp(beta, self.betas, self.inv_mus, right=0.0))

    @property
    def beta_intercept(self) -> Optional[float]:
        """Largest scanned beta with positive height; None when no height is positive."""
        positive = self.betas[self.inv_mus > 0]
        return float(positive.max()) if positive.size else None

    @property
    def inv_mu_intercept(self) -> float:
        return float(self.inv_mus[0])

    def sup_distance(self, other: "TradeoffRegion") -> float:
        """Sup-norm distance between two boundaries on the union of their betas."""
        grid = np.union1d(self.betas, other.betas)
        mine = np.interp(grid, self.betas, self.inv_mus, right=0.0)
        theirs = np.interp(grid, other.betas, other.inv_mus, right=0.0)
        return float(np.max(np.abs(mine - theirs)))

    def rows(self) -> List[tuple]:
        margins = self.margins if self.margins is not None else np.full(self.betas.shape, np.nan)
        return [(self.label, float(b), float(v), float(m))
                for b, v, m in zip(self.betas, self.inv_mus, margins)]

    def __len__(self) -> int:
        return int(self.betas.size)

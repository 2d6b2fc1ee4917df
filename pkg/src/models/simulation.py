"""Monte Carlo simulation settings and reports"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.utils.errors import ValidationError

DEFAULT_BLOCK_TRIALS = 1024
DEFAULT_Z = 4.0
TRIAL_BUDGET = 1 << 34


@dataclass
class SimConfig:
    """Trial count, seeding and sharding of one simulation run.

    Trials are cut into blocks of block_trials; block b draws from
    SeedSequence(seed, spawn_key=(b,)), so results do not depend on shards.
    """
    trials: int
    seed: int = 0
    epsilon: Optional[float] = None
    shards: int = 1
    block_trials: int = DEFAULT_BLOCK_TRIALS
    z: float = DEFAULT_Z
    check_conservation: bool = False
    trial_budget: int = TRIAL_BUDGET

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not (0 <= int(self.seed) < 1 << 64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.epsilon is not None and not (0.0 <= self.epsilon <= 1.0):
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if int(self.shards) < 1 or int(self.block_trials) < 1:
            raise ValidationError("shards and block_trials must be >= 1")
        if not self.z > 0:
            raise ValidationError(f"z must be positive, got {self.z}")
        self.trials = int(self.trials)
        self.seed = int(self.seed)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "seed": self.seed, "epsilon": self.epsilon,
                "shards": self.shards, "block_trials": self.block_trials, "z": self.z}


def normal_interval(successes: np.ndarray, trials: np.ndarray, z: float) -> Tuple[np.ndarray, np.ndarray]:
    """Normal-approximation interval p +- z sqrt(p(1-p)/n), clipped to [0, 1]."""
    successes = np.asarray(successes, dtype=float)
    trials = np.asarray(trials, dtype=float)
    p = successes / trials
    half = z * np.sqrt(p * (1.0 - p) / trials)
    return np.clip(p - half, 0.0, 1.0), np.clip(p + half, 0.0, 1.0)


@dataclass
class SimReport:
    """Per-leaf erasure counts and the block error count of a simulation."""
    leaf_ids: np.ndarray
    analytic_ln_z: np.ndarray
    erased_uses: np.ndarray
    uses_per_trial: np.ndarray
    trials: int
    block_errors: int
    ln_union_bound: float
    z: float = DEFAULT_Z
    notes: List[str] = field(default_factory=list)

    @property
    def empirical_rate(self) -> np.ndarray:
        return self.erased_uses / (self.uses_per_trial.astype(float) * self.trials)

    @property
    def rate_ci(self) -> Tuple[np.ndarray, np.ndarray]:
        return normal_interval(self.erased_uses, self.uses_per_trial * self.trials, self.z)

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials

    @property
    def bler_sigma(self) -> float:
        p = self.bler
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def bler_ci(self) -> Tuple[float, float]:
        lo, hi = normal_interval(np.array([self.block_errors]), np.array([self.trials]), self.z)
        return float(lo[0]), float(hi[0])

    @property
    def union_bound(self) -> float:
        return math.exp(self.ln_union_bound) if self.ln_union_bound > -745 else 0.0

    def within_ci(self) -> np.ndarray:
        """Leaves whose analytic Z lies inside the z-sigma interval of the empirical rate."""
        lo, hi = self.rate_ci
        z = np.exp(self.analytic_ln_z)
        sigma = np.sqrt(z * (1.0 - z) / (self.uses_per_trial * self.trials))
        rate = self.empirical_rate
        return (np.abs(rate - z) <= self.z * sigma) | ((z >= lo) & (z <= hi))

    def rows(self) -> List[tuple]:
        lo, hi = self.rate_ci
        return [(int(v), float(ln_z), float(r), float(a), float(b))
                for v, ln_z, r, a, b in zip(self.leaf_ids, self.analytic_ln_z,
                                            self.empirical_rate, lo, hi)]

    def to_dict(self) -> dict:
        lo, hi = self.bler_ci
        return {"trials": self.trials, "bler": self.bler, "bler_ci_low": lo, "bler_ci_high": hi,
                "union_bound": self.union_bound, "ln_union_bound": self.ln_union_bound}


@dataclass
class UnionBoundReport:
    """Simulated block error rate against the union bound."""
    bler: float
    sigma: float
    union_bound: float
    ln_union_bound: float
    z: float
    trials: int

    @property
    def slack(self) -> float:
        return self.union_bound + self.z * self.sigma - self.bler

    @property
    def flagged(self) -> bool:
        return self.slack < 0

    def to_dict(self) -> dict:
        return {"bler": self.bler, "sigma": self.sigma, "union_bound": self.union_bound,
                "ln_union_bound": self.ln_union_bound, "z": self.z, "trials": self.trials,
                "flagged": self.flagged}

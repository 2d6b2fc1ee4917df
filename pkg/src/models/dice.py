"""The partial-distance dice: a finite distribution of log-increments"""
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import ValidationError


class DiceDistribution:
    """Finite nonnegative random variable Y given by atoms and probabilities.

    For a kernel with partial distances d_1..d_l the dice is Y = log d_X
    with X uniform on 1..l.
    """

    def __init__(
        self,
        values: Sequence[float],
        probs: Sequence[float],
        exact_probs: Optional[Sequence[Fraction]] = None
    ):
        """
        Initialize a dice distribution; duplicate atoms are merged.

        Args:
            values: Atom positions y_j >= 0
            probs: Probabilities p_j summing to 1
            exact_probs: Optional exact rationals matching probs
        """
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
            raise ValidationError("dice needs matching non-empty value and probability lists")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError("dice values must be finite and nonnegative")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValidationError(f"dice probabilities must sum to 1, got {probs.sum()}")

        uniq, inverse = np.unique(values, return_inverse=True)
        self.values = uniq
        self.probs = np.bincount(inverse, weights=probs, minlength=uniq.size)
        self.exact_probs: Optional[List[Fraction]] = None
        if exact_probs is not None:
            merged = [Fraction(0)] * uniq.size
            for idx, fr in zip(inverse, exact_probs):
                merged[idx] += Fraction(fr)
            self.exact_probs = merged

        keep = self.probs > 0
        self.values = self.values[keep]
        self.probs = self.probs[keep]
        if self.exact_probs is not None:
            self.exact_probs = [fr for fr, k in zip(self.exact_probs, keep) if k]
        self.mean = float(np.dot(self.values, self.probs))

    @classmethod
    def from_partial_distances(cls, distances: Sequence[int]) -> "DiceDistribution":
        """Dice Y = log d_X, X uniform over the rows."""
        ell = len(distances)
        if ell == 0 or min(distances) < 1:
            raise ValidationError("partial distances must be positive integers")
        values = [math.log(d) for d in distances]
        return cls(values, [1.0 / ell] * ell, [Fraction(1, ell)] * ell)

    @classmethod
    def reed_solomon(cls, ell: int) -> "DiceDistribution":
        """Uniform dice on log 1, ..., log l."""
        return cls.from_partial_distances(list(range(1, int(ell) + 1)))

    @property
    def support(self) -> List[Tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    @property
    def p_zero(self) -> float:
        """P{Y = 0}."""
        return float(self.probs[self.values == 0].sum())

    @property
    def min_value(self) -> float:
        return float(self.values[0])

    @property
    def max_value(self) -> float:
        return float(self.values[-1])

    @property
    def min_gap(self) -> float:
        """Smallest spacing between atoms (the span when there is one atom)."""
        if self.values.size < 2:
            return max(float(self.values[0]), 1.0)
        return float(np.diff(self.values).min())

    def prob_below(self, y: float) -> float:
        """P{Y < y}."""
        return float(self.probs[self.values < y].sum())

    def mgf(self, lam) -> np.ndarray:
        """E[exp(lam * Y)] for an array of lam."""
        lam = np.asarray(lam, dtype=float)
        return np.exp(np.multiply.outer(lam, self.values)) @ self.probs

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.choice(self.values, size=size, p=self.probs)

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(), "probs": self.probs.tolist(), "mean": self.mean}

    def __repr__(self) -> str:
        atoms = ", ".join(f"({v:.4g}, {p:.4g})" for v, p in self.support)
        return f"DiceDistribution({atoms})"

"""Cramer functions of finite dice and the Chernoff tail bound"""
import math
from typing import Union

import numpy as np
from scipy.special import logsumexp, xlogy

from src.models.dice import DiceDistribution
from src.utils.errors import ValidationError

LAMBDA_CLOSEST_TO_ZERO = -1e-12
NEWTON_STEPS = 200
MEAN_TOLERANCE = 1e-14

ArrayLike = Union[float, np.ndarray]


class CramerFn:
    """Lambda*(y) = sup over lambda < 0 of (lambda*y - log E[exp(lambda*Y)]).

    With the supremum restricted to negative lambda, Lambda* vanishes for
    y >= E[Y], is +inf below min Y and equals -log P{Y = min Y} at min Y.
    """

    def __init__(self, dice: DiceDistribution):
        """
        Args:
            dice: Finite distribution of Y
        """
        self.dice = dice
        self.values = dice.values
        self.ln_probs = np.log(dice.probs)
        self.mean = dice.mean
        self.y_min = dice.min_value
        self.p_zero = dice.p_zero
        self.lam_lo = -60.0 / max(dice.min_gap, 1e-9)
        self.lam_hi = LAMBDA_CLOSEST_TO_ZERO

    def cgf(self, lam: ArrayLike) -> np.ndarray:
        """log E[exp(lam*Y)]."""
        lam = np.asarray(lam, dtype=float)
        return logsumexp(np.multiply.outer(lam, self.values) + self.ln_probs, axis=-1)

    def _tilted(self, lam: np.ndarray):
        logits = lam[:, None] * self.values[None, :] + self.ln_probs[None, :]
        cgf = logsumexp(logits, axis=1)
        weights = np.exp(logits - cgf[:, None])
        mean = weights @ self.values
        var = np.maximum(weights @ self.values ** 2 - mean ** 2, 0.0)
        return cgf, mean, var

    def _solve(self, y: np.ndarray) -> np.ndarray:
        """Safeguarded Newton for the tilted mean equal to y."""
        lo = np.full(y.shape, self.lam_lo)
        hi = np.full(y.shape, self.lam_hi)
        var0 = max(float(self.dice.probs @ (self.values - self.mean) ** 2), 1e-300)
        lam = np.clip(-(self.mean - y) / var0, lo, hi)
        scale = max(1.0, self.values[-1])
        for _ in range(NEWTON_STEPS):
            _, mean, var = self._tilted(lam)
            gap = mean - y
            if np.all(np.abs(gap) <= MEAN_TOLERANCE * scale):
                break
            hi = np.where(gap > 0, lam, hi)
            lo = np.where(gap <= 0, lam, lo)
            with np.errstate(divide='ignore', invalid='ignore'):
                newton = lam - gap / var
            geometric = -np.sqrt(lo * hi)
            midpoint = np.where(lo / hi > 4.0, geometric, 0.5 * (lo + hi))
            inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
            lam = np.where(inside, newton, midpoint)
        return lam

    def __call__(self, y: ArrayLike) -> ArrayLike:
        """Evaluate Lambda* on a scalar or an array of y."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros_like(y_arr)

        below = y_arr < self.y_min
        at_min = np.isclose(y_arr, self.y_min, rtol=0.0, atol=1e-15) & ~below
        interior = (y_arr < self.mean) & ~below & ~at_min
        out[below] = np.inf
        out[at_min] = -self.ln_probs[0] if self.y_min < self.mean else 0.0

        if interior.any():
            targets = y_arr[interior]
            lam = self._solve(targets)
            value = lam * targets - self.cgf(lam)
            out[interior] = np.maximum(value, 0.0)

        if np.ndim(y) == 0:
            return float(out[0])
        return out

    def __repr__(self) -> str:
        return f"CramerFn(mean={self.mean:.6g}, atoms={self.values.size})"


def cramer_eval(dice: DiceDistribution, y: ArrayLike) -> ArrayLike:
    """
    Lambda*(y) of the dice.

    Raises:
        ValidationError: negative y
    """
    if np.any(np.asarray(y) < 0):
        raise ValidationError("Cramer function is evaluated at y >= 0 only")
    return CramerFn(dice)(y)


def cramer_closed_arikan(beta: ArrayLike) -> ArrayLike:
    """
    1 + beta log2 beta + (1-beta) log2(1-beta) on [0, 1/2], and 0 beyond.

    This is Lambda*(beta log 2)/log 2 for the Arikan dice.

    Raises:
        ValidationError: beta outside [0, 1]
    """
    b = np.asarray(beta, dtype=float)
    if np.any((b < 0) | (b > 1)):
        raise ValidationError("beta must lie in [0, 1]")
    value = 1.0 + (xlogy(b, b) + xlogy(1 - b, 1 - b)) / math.log(2)
    value = np.where(b >= 0.5, 0.0, value)
    return float(value) if value.ndim == 0 else value


def chernoff_tail(dice: DiceDistribution, n: int, y: float) -> float:
    """
    exp(-n Lambda*(y)), the bound on P{(Y_1 + ... + Y_n)/n <= y}.

    Raises:
        ValidationError: n < 1
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    rate = cramer_eval(dice, y)
    return math.exp(-n * rate) if math.isfinite(rate) else 0.0

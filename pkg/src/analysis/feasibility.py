"""Feasibility predicates for achievable (beta', mu') pairs"""
import math
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar

from src.analysis.cramer import CramerFn
from src.models.dice import DiceDistribution
from src.models.tradeoff_region import FeasibilityResult
from src.utils.errors import ValidationError

PI_GRID_SIZE = 1024

RateFunction = Callable[[np.ndarray], np.ndarray]


def as_rate_function(dice_or_fn: Union[DiceDistribution, CramerFn, RateFunction]):
    """Accept a dice, a CramerFn or any Lambda*-like callable."""
    if isinstance(dice_or_fn, DiceDistribution):
        return CramerFn(dice_or_fn)
    return dice_or_fn


def _margins(rate, log_ell: float, mu_star: float, beta_p: float, mu_p: float,
             pis: np.ndarray, y_shift: float) -> np.ndarray:
    denominators = mu_p - pis * mu_star
    out = np.full(pis.shape, -np.inf)
    ok = denominators > 0
    if ok.any():
        lhs = (1.0 - pis[ok]) * log_ell / denominators[ok]
        y = beta_p * mu_p * log_ell / denominators[ok] + y_shift
        rhs = np.asarray(rate(y), dtype=float)
        out[ok] = rhs - lhs
    return out


def thm5_margin(dice, ell: int, mu_star: float, beta_p: float, mu_p: float,
                pi_grid_size: int = PI_GRID_SIZE, y_shift: float = 0.0,
                refine: bool = False) -> float:
    """Minimum over the pi grid of Lambda*(y_pi + y_shift) - (1-pi) log l / (mu' - pi mu*)."""
    return _scan(as_rate_function(dice), ell, mu_star, beta_p, mu_p,
                 pi_grid_size, y_shift, refine)[0]


def _scan(rate, ell, mu_star, beta_p, mu_p, pi_grid_size, y_shift, refine):
    if mu_p <= 0 or beta_p < 0:
        raise ValidationError("need mu' > 0 and beta' >= 0")
    log_ell = math.log(ell)
    pis = np.linspace(0.0, 1.0, pi_grid_size + 2)
    margins = _margins(rate, log_ell, mu_star, beta_p, mu_p, pis, y_shift)
    j = int(np.argmin(margins))
    margin, worst = float(margins[j]), float(pis[j])
    if refine and math.isfinite(margin):
        lo, hi = pis[max(j - 1, 0)], pis[min(j + 1, pis.size - 1)]
        res = minimize_scalar(
            lambda p: float(_margins(rate, log_ell, mu_star, beta_p, mu_p,
                                     np.array([p]), y_shift)[0]),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        if res.success and res.fun < margin:
            margin, worst = float(res.fun), float(res.x)
    return margin, worst


def feasible_thm5(dice, ell: int, mu_star: float, beta_p: float, mu_p: float,
                  pi_grid_size: int = PI_GRID_SIZE, refine: bool = True) -> FeasibilityResult:
    """
    Single-kernel achievability test for (beta', mu').

    True iff P{Y=0} < l^(-1/mu*) and, for every pi on the grid,
    (1-pi) log l / (mu' - pi mu*) < Lambda*(beta' mu' log l / (mu' - pi mu*)).

    Args:
        dice: DiceDistribution (or a Lambda* callable exposing p_zero)
        ell: Kernel length
        mu_star: Scaling exponent of the kernel
        beta_p: Target error exponent beta' >= 0
        mu_p: Target scaling exponent mu' > 0
        pi_grid_size: Interior grid points (endpoints are added)
        refine: Polish the worst grid cell with a bounded scalar minimizer

    Returns:
        FeasibilityResult
    """
    rate = as_rate_function(dice)
    p0_ok = rate.p_zero < ell ** (-1.0 / mu_star)
    margin, worst = _scan(rate, ell, mu_star, beta_p, mu_p, pi_grid_size, 0.0, refine)
    return FeasibilityResult(p0_ok and margin > 0, margin, p0_ok, worst)


def feasible_thm6(dice_err, ell: int, mu_star_rat: float, beta_p: float, mu_p: float,
                  rat_precondition: bool = True, pi_grid_size: int = PI_GRID_SIZE,
                  refine: bool = True) -> FeasibilityResult:
    """
    Two-kernel achievability test: the rate kernel supplies mu*_rat, the error
    kernel supplies Lambda*_err.

    Args:
        dice_err: Dice of the error kernel, or a Lambda* callable
        ell: Length of the error kernel
        mu_star_rat: Scaling exponent of the rate kernel
        beta_p: Target beta'
        mu_p: Target mu'
        rat_precondition: Whether P{Y_rat = 0} < l_rat^(-1/mu*_rat) holds

    Returns:
        FeasibilityResult
    """
    rate = as_rate_function(dice_err)
    margin, worst = _scan(rate, ell, mu_star_rat, beta_p, mu_p, pi_grid_size, 0.0, refine)
    method = getattr(rate, "method", "exact")
    return FeasibilityResult(bool(rat_precondition) and margin > 0, margin,
                             bool(rat_precondition), worst, method)

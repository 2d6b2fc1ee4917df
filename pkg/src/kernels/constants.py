"""Constant picking for the recruit-train-retain templates.

Each "pick a number such that" step is replaced by a search over an
explicit grid; whatever is returned has been checked against the
inequalities it must satisfy.
"""
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from src.kernels.erasure_table import ErasureCountTable, child_ln_eps
from src.kernels.kernel import Kernel
from src.kernels.kernel_analyzer import kernel_dice, op_norm
from src.models.dice import DiceDistribution
from src.utils.errors import InfeasibleTargetError
from src.utils.logger import default_logger as logger

UPSILON_EXPONENTS = tuple(range(2, 21))
EPS_START = 0.5
EPS_RATIO = 0.8
EPS_COUNT = 80
LN_DELTA_FLOOR = -1e5
DELTA_BISECTION_STEPS = 60
DELTA_GRID_POINTS = 200


@dataclass
class RecyclableConstants:
    """Upsilon, epsilon and delta for the recyclable template."""
    upsilon_exponent: float
    eps: float
    ln_delta: float
    mu_star: float
    target: float
    notes: list = dc_field(default_factory=list)

    @property
    def upsilon(self) -> float:
        return math.exp(self.upsilon_exponent)

    @property
    def delta(self) -> float:
        return math.exp(self.ln_delta)

    def to_dict(self) -> dict:
        return {
            "upsilon": self.upsilon,
            "eps": self.eps,
            "delta": self.delta,
            "ln_delta": self.ln_delta,
            "mu_star": self.mu_star,
        }


@dataclass
class DisposableConstants:
    """Epsilon and delta for the disposable template."""
    eps: float
    ln_delta: float
    beta_p: float
    mu_p: float
    mu_star: float

    @property
    def delta(self) -> float:
        return math.exp(self.ln_delta)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "delta": self.delta, "ln_delta": self.ln_delta,
                "beta_p": self.beta_p, "mu_p": self.mu_p, "mu_star": self.mu_star}


def eps_grid(start: float = EPS_START, ratio: float = EPS_RATIO, count: int = EPS_COUNT) -> np.ndarray:
    """Decreasing geometric grid of candidate epsilons."""
    return start * ratio ** np.arange(count)


def upsilon_moment(dice: DiceDistribution, upsilon_exponent: float) -> float:
    """E[Upsilon^-Y] for Upsilon = exp(upsilon_exponent)."""
    return float(np.dot(dice.probs, np.exp(-upsilon_exponent * dice.values)))


def supermartingale_ln_delta_cap(dice: DiceDistribution, norm: float, eps: float) -> Optional[float]:
    """
    Largest ln(delta) with |T|^eps P{Y < 2eps} + delta^(eps^2) P{Y >= 2eps} <= 1.

    Returns:
        The cap, or None when even delta -> 0 leaves the left side above 1
    """
    below = dice.prob_below(2 * eps)
    head = norm ** eps * below
    tail = 1.0 - below
    if head >= 1.0:
        return None
    if tail <= 0.0:
        return 0.0
    return min(0.0, math.log((1.0 - head) / tail) / eps ** 2)


def increment_check(table: ErasureCountTable, distances: Sequence[int], eps: float,
                    ln_delta: float, n_points: int = DELTA_GRID_POINTS) -> bool:
    """
    Whether log(log eps_i(z) / log z) > log d_i - eps for all z < delta and all i.

    Checked on a geometric grid of ln z from ln(delta) down to 1000 ln(delta).
    """
    x = ln_delta * np.geomspace(1.0, 1e3, n_points)
    x = np.minimum(x, -1e-300)
    ln_children = child_ln_eps(table, x)
    with np.errstate(divide='ignore', invalid='ignore'):
        lhs = np.log(ln_children / x[:, None])
    rhs = np.log(np.asarray(distances, dtype=float)) - eps
    return bool(np.all(lhs > rhs[None, :]))


def increment_ln_delta_cap(table: ErasureCountTable, distances: Sequence[int], eps: float,
                           floor: float = LN_DELTA_FLOOR) -> Optional[float]:
    """Largest ln(delta) passing increment_check, by bisection; None below floor."""
    hi = -1e-9
    if increment_check(table, distances, eps, hi):
        return hi
    lo = floor
    if not increment_check(table, distances, eps, lo):
        return None
    for _ in range(DELTA_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if increment_check(table, distances, eps, mid):
            lo = mid
        else:
            hi = mid
    return lo


def _pick_ln_delta(dice: DiceDistribution, norm: float, eps: float,
                   table: Optional[ErasureCountTable], floor: float) -> Optional[float]:
    cap = supermartingale_ln_delta_cap(dice, norm, eps)
    if cap is None:
        return None
    if table is not None:
        cap_increment = increment_ln_delta_cap(table, table.partial_distances, eps, floor)
        if cap_increment is None:
            return None
        cap = min(cap, cap_increment)
    if cap < floor:
        return None
    return min(cap, -1e-9)


def pick_constants_recyclable(
    kernel: Kernel,
    mu_star: float,
    upsilon_exponents: Sequence[float] = UPSILON_EXPONENTS,
    eps_candidates: Optional[Sequence[float]] = None,
    ln_delta_floor: float = LN_DELTA_FLOOR
) -> RecyclableConstants:
    """
    Constants (Upsilon, epsilon, delta) for the recyclable template.

    Upsilon is the first e^u with E[Upsilon^-Y] < l^(-1/mu*); epsilon is the
    first grid value with E[Upsilon^-Y] Upsilon^(2 eps) < l^(-1/mu*) that also
    admits a delta; delta is the largest value (bisection in ln delta) that
    keeps (Z_i ^ delta)^eps a supermartingale and passes the increment check.

    Raises:
        InfeasibleTargetError: P{Y = 0} >= l^(-1/mu*) or no witness on the grids
    """
    dice = kernel_dice(kernel)
    target = kernel.ell ** (-1.0 / mu_star)
    if dice.p_zero >= target:
        raise InfeasibleTargetError(
            f"P{{Y=0}} = {dice.p_zero:.4g} is not below l^(-1/mu*) = {target:.4g}")

    exponent = next((u for u in upsilon_exponents if upsilon_moment(dice, u) < target), None)
    if exponent is None:
        raise InfeasibleTargetError("no Upsilon on the search grid satisfies E[Upsilon^-Y] < target")
    moment = upsilon_moment(dice, exponent)

    norm = op_norm(kernel)
    table = kernel.table
    candidates = eps_grid() if eps_candidates is None else eps_candidates
    for eps in candidates:
        if not (0 < eps < 1):
            continue
        if moment * math.exp(2 * eps * exponent) >= target:
            continue
        ln_delta = _pick_ln_delta(dice, norm, eps, table, ln_delta_floor)
        if ln_delta is None:
            continue
        logger.debug(f"Recyclable constants for {kernel.name}: ln Upsilon={exponent}, "
                     f"eps={eps:.4g}, ln delta={ln_delta:.4g}")
        return RecyclableConstants(exponent, float(eps), ln_delta, mu_star, target)
    raise InfeasibleTargetError(f"no (eps, delta) pair found for {kernel.name}")


def pick_constants_disposable(
    dice: DiceDistribution,
    ell: int,
    mu_star: float,
    beta_p: float,
    mu_p: float,
    kernel: Optional[Kernel] = None,
    eps_candidates: Optional[Sequence[float]] = None,
    pi_grid_size: int = 1024,
    ln_delta_floor: float = LN_DELTA_FLOOR
) -> DisposableConstants:
    """
    Constants (epsilon, delta) for the disposable template.

    epsilon keeps the feasibility inequality strict with y shifted by +eps,
    both for mu' and for mu' - eps. delta follows the supermartingale rule;
    when the kernel is given it must also pass the increment check, otherwise
    |T| is bounded by l.

    Raises:
        InfeasibleTargetError: (beta', mu') fails the feasibility predicate or
            no epsilon on the grid keeps the slack
    """
    from src.analysis.feasibility import feasible_thm5, thm5_margin

    verdict = feasible_thm5(dice, ell, mu_star, beta_p, mu_p, pi_grid_size)
    if not verdict.feasible:
        raise InfeasibleTargetError(
            f"(beta'={beta_p}, 1/mu'={1 / mu_p:.4g}) is outside the achievable region "
            f"(margin {verdict.margin:.3g})")

    norm = op_norm(kernel) if kernel is not None else float(ell)
    table = kernel.table if kernel is not None else None
    if kernel is None:
        logger.warning("No kernel given: delta uses |T| <= l and skips the increment check")

    candidates = eps_grid() if eps_candidates is None else eps_candidates
    for eps in candidates:
        if not (0 < eps < 1) or mu_p - eps <= mu_star:
            continue
        if thm5_margin(dice, ell, mu_star, beta_p, mu_p, pi_grid_size, y_shift=eps) <= 0:
            continue
        if thm5_margin(dice, ell, mu_star, beta_p, mu_p - eps, pi_grid_size, y_shift=eps) <= 0:
            continue
        ln_delta = _pick_ln_delta(dice, norm, eps, table, ln_delta_floor)
        if ln_delta is None:
            continue
        logger.debug(f"Disposable constants: eps={eps:.4g}, ln delta={ln_delta:.4g}")
        return DisposableConstants(float(eps), ln_delta, beta_p, mu_p, mu_star)
    raise InfeasibleTargetError(
        f"no epsilon keeps slack for (beta'={beta_p}, 1/mu'={1 / mu_p:.4g})")

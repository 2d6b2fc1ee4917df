"""Reed-Solomon dice: closed-form Cramer bounds and the parameter search"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from src.analysis.cramer import CramerFn
from src.analysis.feasibility import PI_GRID_SIZE, feasible_thm6
from src.models.dice import DiceDistribution
from src.utils.errors import InfeasibleTargetError, ValidationError
from src.utils.logger import default_logger as logger

EXACT_MAX_K = 10
MAX_K = 30
HEAD_TERMS = 4096
LAMBDA_GRID = 4000


def _check_ell(ell: int) -> float:
    if ell < 4 or ell & (ell - 1):
        raise ValidationError(f"l must be a power of two >= 4, got {ell}")
    return math.log(ell)


def rs_bound(ell: int, y):
    """
    (log l - y)(1 - 1/log l) - log log l, a lower bound on Lambda*(y) of the
    uniform dice on log 1, ..., log l.

    Raises:
        ValidationError: l is not a power of two >= 4
    """
    log_ell = _check_ell(ell)
    value = (log_ell - np.asarray(y, dtype=float)) * (1.0 - 1.0 / log_ell) - math.log(log_ell)
    return float(value) if value.ndim == 0 else value


def rs_ystar(ell: int) -> float:
    """The root y* of rs_bound: log l - log log l / (1 - 1/log l)."""
    log_ell = _check_ell(ell)
    return log_ell - math.log(log_ell) / (1.0 - 1.0 / log_ell)


class RSCramerBound:
    """Certified lower bound on Lambda* of the Reed-Solomon dice for large l.

    Lambda*(y) >= max_j (lambda_j y - Lambda_up(lambda_j)) for any lambda_j < 0,
    where Lambda_up bounds the cumulant generating function from above by an
    exact head sum plus an integral bound on the decreasing tail of x^lambda.
    """

    method = "rs-bound"

    def __init__(self, ell: int, head_terms: int = HEAD_TERMS, n_lambda: int = LAMBDA_GRID):
        self.ell = int(ell)
        self.log_ell = math.log(self.ell)
        self.mean = float(gammaln(self.ell + 1) / self.ell)
        self.p_zero = 1.0 / self.ell
        head = min(head_terms, self.ell)

        lam = -np.geomspace(1e-6, 60.0, n_lambda)
        xs = np.arange(1, head + 1, dtype=float)
        head_sum = np.exp(np.multiply.outer(lam, np.log(xs))).sum(axis=1)
        a = lam + 1.0
        log_head = math.log(head)
        with np.errstate(divide='ignore', invalid='ignore'):
            tail = np.where(
                np.abs(a) < 1e-12,
                self.log_ell - log_head,
                np.exp(a * log_head) * np.expm1(a * (self.log_ell - log_head)) / a,
            )
        if head == self.ell:
            tail = np.zeros_like(tail)
        self.lam = lam
        self.cgf_upper = np.log(head_sum + tail) - self.log_ell

    def __call__(self, y):
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        values = np.max(np.multiply.outer(y_arr, self.lam) - self.cgf_upper[None, :], axis=1)
        values = np.where(y_arr >= self.mean, 0.0, np.maximum(values, 0.0))
        return float(values[0]) if np.ndim(y) == 0 else values


@dataclass
class RSChoice:
    k: int
    ell: int
    margin: float
    method: str

    def to_dict(self) -> dict:
        return {"k": self.k, "ell": self.ell, "margin": self.margin, "method": self.method}


def in_triangle(beta_p: float, inv_mu_p: float) -> bool:
    """Strictly inside the triangle with vertices (0, 1/2), (0, 0), (1, 0)."""
    return beta_p > 0 and inv_mu_p > 0 and beta_p + 2 * inv_mu_p < 1


def rs_rate_function(k: int, exact_max_k: int = EXACT_MAX_K):
    """Exact Lambda* up to 2^exact_max_k atoms, the certified bound beyond."""
    ell = 2 ** k
    if k <= exact_max_k:
        return CramerFn(DiceDistribution.reed_solomon(ell))
    return RSCramerBound(ell)


def choose_rs_parameters(
    beta_p: float,
    mu_p: float,
    mu_star_rat: float,
    max_k: int = MAX_K,
    exact_max_k: int = EXACT_MAX_K,
    pi_grid_size: int = PI_GRID_SIZE
) -> RSChoice:
    """
    Smallest k such that the Reed-Solomon error kernel of length 2^k makes
    (beta', mu') achievable together with a rate kernel of exponent mu*_rat.

    Raises:
        InfeasibleTargetError: point outside the triangle, or no k <= max_k
    """
    inv_mu_p = 1.0 / mu_p
    if not in_triangle(beta_p, inv_mu_p):
        raise InfeasibleTargetError(
            f"(beta'={beta_p}, 1/mu'={inv_mu_p:.4g}) is not strictly inside the triangle "
            "(0, 1/2), (0, 0), (1, 0)")
    best_margin: Optional[float] = None
    for k in range(1, max_k + 1):
        rate = rs_rate_function(k, exact_max_k)
        verdict = feasible_thm6(rate, 2 ** k, mu_star_rat, beta_p, mu_p,
                                rat_precondition=True, pi_grid_size=pi_grid_size)
        best_margin = verdict.margin if best_margin is None else max(best_margin, verdict.margin)
        if verdict.feasible:
            logger.info(f"RS kernel of length 2^{k} reaches ({beta_p}, {inv_mu_p:.4g}) "
                        f"with margin {verdict.margin:.4g} ({verdict.method})")
            return RSChoice(k, 2 ** k, verdict.margin, verdict.method)
    raise InfeasibleTargetError(
        f"no k <= {max_k} found for (beta'={beta_p}, 1/mu'={inv_mu_p:.4g}) with "
        f"mu*_rat={mu_star_rat} (best margin {best_margin:.4g})")

"""Finite-length error and scaling exponents of code sequences"""
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression

from src.construction.code_parameters import (block_length, capacity_gap, code_rate,
                                              error_bound, select_by_budget, select_by_rate)
from src.construction.tree_builder import MERGED_CLASS_LIMIT, merged_levels
from src.kernels.kernel import Kernel
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

EXPONENT_COLUMNS = ["N", "R", "ln_P", "beta_ratio", "inv_mu_ratio",
                    "beta_hat", "inv_mu_hat", "skipped"]


@dataclass
class ExponentSeries:
    """Per-point exponent ratios with their running minima."""
    frame: pd.DataFrame
    beta_hat: float
    inv_mu_hat: float

    def to_dict(self) -> dict:
        return {"beta_hat": self.beta_hat, "inv_mu_hat": self.inv_mu_hat,
                "points": int(len(self.frame))}


def empirical_exponents(series: Iterable[Tuple[int, float, float]], capacity: float) -> ExponentSeries:
    """
    Ratios log(-log P)/log N and -log(I - R)/log N along a code sequence.

    Running minima stand in for the liminf of each ratio. Points with
    R >= I(W), or with P outside (0, 1), are kept in the table with
    skipped=True and NaN in the affected ratio.

    Args:
        series: (N, R, ln P) per code, ln P the natural log of the error
            probability so that doubly small values survive
        capacity: I(W)

    Returns:
        ExponentSeries; beta_hat and inv_mu_hat are the last running minima

    Raises:
        ValidationError: fewer than two points, or N < 2
    """
    points = [(int(N), float(R), float(ln_p)) for N, R, ln_p in series]
    if len(points) < 2:
        raise ValidationError(f"need at least two (N, R, P) points, got {len(points)}")
    rows = []
    best_beta = math.inf
    best_inv_mu = math.inf
    for N, R, ln_p in points:
        if N < 2:
            raise ValidationError(f"block length must be >= 2, got {N}")
        ln_n = math.log(N)
        skipped = False
        beta = math.nan
        if -math.inf < ln_p < 0.0:
            beta = math.log(-ln_p) / ln_n
            best_beta = min(best_beta, beta)
        else:
            skipped = True
        inv_mu = math.nan
        gap = capacity - R
        if gap > 0.0:
            inv_mu = -math.log(gap) / ln_n
            best_inv_mu = min(best_inv_mu, inv_mu)
        else:
            skipped = True
        rows.append({"N": N, "R": R, "ln_P": ln_p, "beta_ratio": beta, "inv_mu_ratio": inv_mu,
                     "beta_hat": best_beta if best_beta < math.inf else math.nan,
                     "inv_mu_hat": best_inv_mu if best_inv_mu < math.inf else math.nan,
                     "skipped": skipped})
    frame = pd.DataFrame(rows, columns=EXPONENT_COLUMNS)
    if frame["skipped"].any():
        logger.warning(f"{int(frame['skipped'].sum())} exponent points skipped")
    return ExponentSeries(frame, float(frame["beta_hat"].iloc[-1]), float(frame["inv_mu_hat"].iloc[-1]))


def _levels(W: ErasureChannel, T: Kernel, n_range: Sequence[int], class_limit: int):
    depths = sorted(set(int(n) for n in n_range))
    if not depths or depths[0] < 1:
        raise ValidationError(f"depths must be >= 1, got {list(n_range)}")
    wanted = set(depths)
    for tree in merged_levels(W, [T] * depths[-1], class_limit):
        if tree.max_depth in wanted:
            yield tree


def scaling_trend(W: ErasureChannel, T: Kernel, n_range: Sequence[int], ln_budget: float = math.log(1e-3),
                  class_limit: int = MERGED_CLASS_LIMIT) -> pd.DataFrame:
    """
    Best rate under a fixed union-bound budget, per depth.

    Returns:
        DataFrame with columns n, N, R, gap, ln_P
    """
    rows = []
    for tree in _levels(W, T, n_range, class_limit):
        A = select_by_budget(tree, ln_budget)
        rows.append({"n": tree.max_depth, "N": block_length(tree), "R": code_rate(tree, A),
                     "gap": capacity_gap(tree, A), "ln_P": error_bound(tree, A)})
    frame = pd.DataFrame(rows, columns=["n", "N", "R", "gap", "ln_P"])
    logger.info(f"Scaling trend for {T.name}: {len(frame)} depths")
    return frame


def fit_scaling_slope(frame: pd.DataFrame) -> float:
    """
    Least-squares slope of log(I - R) against log N.

    Raises:
        ValidationError: fewer than two usable rows
    """
    usable = frame[frame["gap"] > 0]
    if len(usable) < 2:
        raise ValidationError("need two rows with a positive capacity gap to fit a slope")
    x = np.log(usable["N"].astype(float).to_numpy()).reshape(-1, 1)
    y = np.log(usable["gap"].to_numpy())
    model = LinearRegression().fit(x, y)
    return float(model.coef_[0])


def error_exponent_trend(W: ErasureChannel, T: Kernel, n_range: Sequence[int], rate: float = 0.4,
                         class_limit: int = MERGED_CLASS_LIMIT) -> pd.DataFrame:
    """
    Union-bound error at a fixed rate, per depth.

    Returns:
        DataFrame with columns n, N, R, ln_P, beta_ratio where beta_ratio is
        log(-ln P)/log N (NaN once ln P >= 0)
    """
    rows = []
    for tree in _levels(W, T, n_range, class_limit):
        A = select_by_rate(tree, rate)
        N = block_length(tree)
        ln_p = error_bound(tree, A)
        ratio = math.log(-ln_p) / math.log(N) if -math.inf < ln_p < 0.0 else math.nan
        rows.append({"n": tree.max_depth, "N": N, "R": code_rate(tree, A), "ln_P": ln_p,
                     "beta_ratio": ratio})
    frame = pd.DataFrame(rows, columns=["n", "N", "R", "ln_P", "beta_ratio"])
    logger.info(f"Error exponent trend for {T.name} at R={rate}: {len(frame)} depths")
    return frame

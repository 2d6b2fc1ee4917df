"""Finite-depth estimates of the scaling exponent mu* of a kernel"""
import math
from typing import Dict, Iterable, Sequence, Tuple

import pandas as pd

from src.construction.code_parameters import block_length, capacity_gap, code_rate
from src.construction.tree_builder import MERGED_CLASS_LIMIT, merged_levels
from src.kernels.kernel import Kernel
from src.models.erasure_channel import ErasureChannel
from src.selection.threshold import quasi_polynomial_ln_threshold, select_threshold
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

MU_COLUMNS = ["epsilon", "n", "N", "rate", "gap", "clamped_gap", "mu_estimate"]


def mu_from_gap(ln_n: float, gap: float) -> Tuple[float, float]:
    """
    log N / -log max(gap, N^(-1/2)).

    Returns:
        (clamped gap, estimate); the estimate is inf when the clamped gap
        reaches 1 and never drops below 2 otherwise
    """
    clamped = max(gap, math.exp(-0.5 * ln_n))
    if clamped >= 1.0:
        return clamped, math.inf
    return clamped, ln_n / -math.log(clamped)


def estimate_mu_star(
    T: Kernel,
    epsilons: Iterable[float],
    n_range: Sequence[int],
    threshold_exponent: float = 2.0 / 3.0,
    class_limit: int = MERGED_CLASS_LIMIT
) -> Tuple[pd.DataFrame, Dict]:
    """
    Estimate mu* from threshold codes on merged perfect trees.

    For every root erasure probability and depth n, A_n keeps the leaves
    with Z < exp(-n^(2/3)); the row reports log N_n over
    -log max(I(W) - P(A_n), N_n^(-1/2)).

    Args:
        T: Kernel
        epsilons: Root erasure probabilities
        n_range: Depths to report
        threshold_exponent: Exponent of the recruiting cutoff
        class_limit: Maximum distinct channels per merged level

    Returns:
        (table with MU_COLUMNS, summary); the summary's mu_star_estimate is
        the largest last-depth value over the channels, an estimate of a
        limsup rather than a limit
    """
    depths = sorted(set(int(n) for n in n_range))
    if not depths or depths[0] < 1:
        raise ValidationError(f"depths must be >= 1, got {list(n_range)}")
    wanted = set(depths)
    rows = []
    for eps in epsilons:
        W = ErasureChannel(T.field, float(eps))
        for tree in merged_levels(W, [T] * depths[-1], class_limit):
            n = tree.max_depth
            if n not in wanted:
                continue
            A = select_threshold(tree, ln_threshold=quasi_polynomial_ln_threshold(n, threshold_exponent))
            N = block_length(tree)
            gap = capacity_gap(tree, A)
            clamped, estimate = mu_from_gap(math.log(N), gap)
            rows.append({"epsilon": float(eps), "n": n, "N": N, "rate": code_rate(tree, A),
                         "gap": gap, "clamped_gap": clamped, "mu_estimate": estimate})
            logger.debug(f"mu estimate eps={eps} n={n}: gap {gap:.4g}, mu {estimate:.4g}")

    frame = pd.DataFrame(rows, columns=MU_COLUMNS)
    last = frame[frame["n"] == depths[-1]]
    summary = {
        "kernel": T.name,
        "n_last": depths[-1],
        "mu_star_estimate": float(last["mu_estimate"].max()) if len(last) else math.nan,
        "kind": "limsup estimate",
    }
    logger.info(f"mu* estimate for {T.name} at n={depths[-1]}: {summary['mu_star_estimate']:.4g}")
    return frame, summary

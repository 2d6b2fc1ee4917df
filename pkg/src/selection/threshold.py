"""Threshold selection: keep every leaf whose Z is below a cutoff"""
import math
from typing import Optional

import numpy as np

from src.utils.errors import ValidationError


def quasi_polynomial_ln_threshold(n: int, exponent: float = 2.0 / 3.0) -> float:
    """ln of exp(-n^exponent), the default recruiting cutoff at depth n."""
    return -(n ** exponent)


def select_threshold(tree, threshold: Optional[float] = None,
                     ln_threshold: Optional[float] = None) -> np.ndarray:
    """
    Leaves w with Z(w) < threshold.

    Args:
        tree: ChannelTree or MergedTree
        threshold: Linear cutoff; >= 1 keeps every leaf, <= 0 keeps none
        ln_threshold: Cutoff on ln Z, for cutoffs below double range

    Returns:
        Sorted leaf ids (class ids for a merged tree)
    """
    if (threshold is None) == (ln_threshold is None):
        raise ValidationError("give exactly one of threshold and ln_threshold")
    leaves = np.asarray(tree.leaves)
    if threshold is not None:
        if threshold >= 1.0:
            return leaves.copy()
        if threshold <= 0.0:
            return np.empty(0, dtype=np.int64)
        ln_threshold = math.log(threshold)
    return leaves[tree.ln_z_of(leaves) < ln_threshold]

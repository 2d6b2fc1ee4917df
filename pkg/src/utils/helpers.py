"""Helper utility functions"""
import math
import os
from typing import Iterable

import numpy as np


def format_real(value: float) -> str:
    """
    Format a real for CSV output with a stable textual form.

    Args:
        value: Number to format

    Returns:
        12 significant digits, or 'inf' / '-inf' / 'nan'
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


def log1mexp(x):
    """
    Compute log(1 - exp(x)) for x <= 0.

    Uses log(-expm1(x)) near zero and log1p(-exp(x)) far from it.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        out = np.where(
            x > -math.log(2.0),
            np.log(-np.expm1(x)),
            np.log1p(-np.exp(x)),
        )
    return out if out.ndim else float(out)


def lcm_of(values: Iterable[int]) -> int:
    """Least common multiple of positive integers (1 for an empty input)."""
    result = 1
    for v in values:
        result = math.lcm(result, int(v))
    return result


def worker_count(requested: int = -1) -> int:
    """
    Resolve a joblib n_jobs value, capped by POLARFORGE_THREADS.

    Args:
        requested: Desired worker count (-1 for all cores)

    Returns:
        Positive worker count
    """
    cap = os.environ.get("POLARFORGE_THREADS")
    available = os.cpu_count() or 1
    count = available if requested is None or requested < 1 else requested
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, count)

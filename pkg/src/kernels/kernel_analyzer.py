"""Exponents and derived quantities of a kernel over erasure channels"""
import math
from typing import List, Optional

import numpy as np

from src.models.dice import DiceDistribution
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import BudgetExceededError, ValidationError
from src.kernels.erasure_table import child_ln_eps
from src.kernels.kernel import Kernel

OP_NORM_GRID = 10_000
OP_NORM_SAFETY = 1e-9
COSET_ENUMERATION_LIMIT = 1 << 22


def synthetic_children(kernel: Kernel, ch: ErasureChannel) -> List[ErasureChannel]:
    """
    The l synthetic channels obtained by applying kernel to ch.

    Raises:
        ValidationError: channel and kernel live over different fields
    """
    if ch.field != kernel.field:
        raise ValidationError(f"channel over {ch.field!r} cannot use kernel over {kernel.field!r}")
    ln_children = child_ln_eps(kernel.table, ch.ln_epsilon)
    return [ErasureChannel(ch.field, ln_epsilon=float(x)) for x in ln_children]


def partial_distances(kernel: Kernel) -> List[int]:
    """d_i = smallest erasure-pattern size that leaves row i undetermined."""
    return kernel.table.partial_distances


def coset_min_weights(kernel: Kernel) -> List[int]:
    """
    Minimum weight over g_i + span(g_{i+1}, ..., g_l), by direct enumeration.

    Scaling by a nonzero constant preserves weights, so only a = 1 is visited.

    Raises:
        BudgetExceededError: q^(l-1) coset members exceed the enumeration limit
    """
    f = kernel.field
    rows = np.asarray(kernel.rows)
    ell = kernel.ell
    if f.q ** (ell - 1) > COSET_ENUMERATION_LIMIT:
        raise BudgetExceededError(
            f"{f.q}^{ell - 1} coset members exceed the enumeration limit")
    weights = [0] * ell
    span = np.zeros((1, ell), dtype=np.int64)
    for i in range(ell - 1, -1, -1):
        coset = f.add(span, rows[i][None, :])
        weights[i] = int(np.count_nonzero(coset, axis=1).min())
        if i > 0:
            scalars = np.arange(f.q)
            shifts = f.mul(scalars[:, None], rows[i][None, :])
            span = np.asarray(f.add(span[None, :, :], shifts[:, None, :])).reshape(-1, ell)
    return weights


def kernel_dice(kernel: Kernel) -> DiceDistribution:
    """Y = log d_X with X uniform on the rows."""
    return DiceDistribution.from_partial_distances(partial_distances(kernel))


def beta_star(dice: DiceDistribution, ell: int) -> float:
    """
    E[Y] / log l.

    Raises:
        ValidationError: l < 2
    """
    if ell < 2:
        raise ValidationError(f"kernel length must be >= 2, got {ell}")
    return dice.mean / math.log(ell)


def op_norm_grid(n_points: int = OP_NORM_GRID) -> np.ndarray:
    """ln(epsilon) grid refined near 0 and near 1."""
    third = n_points // 3
    near_zero = np.geomspace(1e-12, 1e-2, third, endpoint=False)
    middle = np.linspace(1e-2, 1 - 1e-2, n_points - 2 * third, endpoint=False)
    near_one = 1.0 - np.geomspace(1e-2, 1e-12, third)
    return np.log(np.concatenate([near_zero, middle, near_one]))


def _ratio_sup(kernel: Kernel, n_points: int) -> float:
    """Largest eps_i(epsilon)/epsilon over the grid and the epsilon -> 0 limit."""
    table = kernel.table
    ln_eps = op_norm_grid(n_points)
    ratios = np.exp(child_ln_eps(table, ln_eps) - ln_eps[:, None])
    return max(float(ratios.max()), float(table.counts[:, 1].max()))


def op_norm(kernel: Kernel, n_points: int = OP_NORM_GRID, safety: float = OP_NORM_SAFETY) -> float:
    """
    sup over epsilon in (0,1) and i of eps_i(epsilon)/epsilon, times (1 + safety).

    The epsilon -> 0 limit is A[i][1] for rows with d_i = 1 and 0 otherwise.
    """
    return max(_ratio_sup(kernel, n_points), 1.0) * (1.0 + safety)


def is_powerful(dice: DiceDistribution) -> bool:
    """P{Y > 0} > 0."""
    return bool(np.any((dice.values > 0) & (dice.probs > 0)))


def is_bounded(kernel: Kernel, norm: float, n_points: int = OP_NORM_GRID) -> bool:
    """Whether norm bounds every eps_i(epsilon)/epsilon on the grid (<=, not <)."""
    if not math.isfinite(norm):
        return False
    return _ratio_sup(kernel, n_points) <= norm


def analyze_kernel(kernel: Kernel, norm: Optional[float] = None) -> dict:
    """
    Summary row used by `kernel analyze`.

    Returns:
        Dictionary with name, q, ell, distances, beta_star, op_norm, dice
        support, powerful flag and whether op_norm (or the supplied
        norm) bounds the child-to-parent Z ratios
    """
    kernel.table.verify()
    distances = partial_distances(kernel)
    dice = DiceDistribution.from_partial_distances(distances)
    norm = op_norm(kernel) if norm is None else norm
    return {
        "name": kernel.name,
        "q": kernel.field.q,
        "ell": kernel.ell,
        "partial_distances": distances,
        "beta_star": beta_star(dice, kernel.ell),
        "op_norm": norm,
        "dice": dice.support,
        "p_zero": dice.p_zero,
        "powerful": is_powerful(dice),
        "bounded": is_bounded(kernel, norm),
    }

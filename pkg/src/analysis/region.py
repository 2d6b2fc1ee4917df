"""Achievable-region boundaries by predicate scan and by convex hull"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial import ConvexHull

from src.analysis.cramer import CramerFn
from src.analysis.feasibility import PI_GRID_SIZE, as_rate_function, thm5_margin
from src.models.dice import DiceDistribution
from src.models.tradeoff_region import TradeoffRegion
from src.utils.errors import InfeasibleTargetError
from src.utils.helpers import worker_count
from src.utils.logger import default_logger as logger

BISECTION_STEPS = 40
BETA_GRID_SIZE = 101
HULL_GRID_SIZE = 2001


def _check_precondition(dice: DiceDistribution, ell: int, mu_star: float) -> None:
    target = ell ** (-1.0 / mu_star)
    if dice.p_zero >= target:
        raise InfeasibleTargetError(
            f"P{{Y=0}} = {dice.p_zero:.4g} is not below l^(-1/mu*) = {target:.4g}")


def region_intercepts(dice: DiceDistribution, ell: int, mu_star: float) -> Tuple[float, float]:
    """The two axis intercepts (beta*, 0) and (0, 1/mu*) of the region."""
    return dice.mean / math.log(ell), 1.0 / mu_star


def q_point(pi: float, beta_p: float, mu_p: float, mu_star: float) -> Tuple[float, float]:
    """Point on the ray from (0, 1/mu*) through (beta', 1/mu'), indexed by pi."""
    denominator = mu_p - pi * mu_star
    return beta_p * mu_p / denominator, (1.0 - pi) / denominator


def _boundary_height(rate, ell: int, mu_star: float, beta_p: float, beta_max: float,
                     steps: int, pi_grid_size: int) -> Tuple[float, float]:
    """Supremal feasible 1/mu' at beta' by bisection; returns (height, margin)."""
    if beta_p >= beta_max:
        return 0.0, 0.0
    lo, hi = 0.0, 1.0 / mu_star
    margin_lo = np.nan
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        margin = thm5_margin(rate, ell, mu_star, beta_p, 1.0 / mid, pi_grid_size)
        if margin > 0:
            lo, margin_lo = mid, margin
        else:
            hi = mid
    return lo, margin_lo


def region_boundary(
    dice: DiceDistribution,
    ell: int,
    mu_star: float,
    beta_grid: Optional[Sequence[float]] = None,
    steps: int = BISECTION_STEPS,
    pi_grid_size: int = PI_GRID_SIZE,
    label: str = "boundary",
    n_jobs: int = 1
) -> TradeoffRegion:
    """
    Boundary of the achievable region, scanned with the feasibility predicate.

    Args:
        dice: Dice of the kernel
        ell: Kernel length
        mu_star: Scaling exponent
        beta_grid: beta' values (default: 101 points on [0, beta*])
        steps: Bisection iterations per beta'
        pi_grid_size: pi grid of the predicate
        label: CSV label
        n_jobs: joblib workers over beta'

    Returns:
        TradeoffRegion with method 'predicate-scan'
    """
    _check_precondition(dice, ell, mu_star)
    beta_max = dice.mean / math.log(ell)
    betas = (np.linspace(0.0, beta_max, BETA_GRID_SIZE) if beta_grid is None
             else np.asarray(beta_grid, dtype=float))
    rate = CramerFn(dice)
    jobs = worker_count(n_jobs) if n_jobs != 1 else 1
    if jobs > 1:
        results = Parallel(n_jobs=jobs)(
            delayed(_boundary_height)(rate, ell, mu_star, b, beta_max, steps, pi_grid_size)
            for b in betas)
    else:
        results = [_boundary_height(rate, ell, mu_star, b, beta_max, steps, pi_grid_size)
                   for b in betas]
    heights = np.array([r[0] for r in results])
    margins = np.array([r[1] for r in results])
    logger.info(f"Region boundary '{label}': 1/mu' intercept {heights[0]:.6f}, "
                f"beta* = {beta_max:.6f}")
    return TradeoffRegion(label, betas, heights, "predicate-scan", ell, mu_star, margins)


def lower_hull(points: np.ndarray) -> np.ndarray:
    """Vertices of the lower convex chain, sorted by x."""
    top = points[:, 1].max() + 1.0
    closed = np.vstack([points, [[points[:, 0].min(), top], [points[:, 0].max(), top]]])
    hull = ConvexHull(closed)
    lower_facets = hull.simplices[hull.equations[:, 1] < -1e-12]
    vertices = np.unique(lower_facets.reshape(-1))
    chain = closed[vertices]
    return chain[np.argsort(chain[:, 0], kind="stable")]


def region_hull(
    dice: DiceDistribution,
    ell: int,
    mu_star: float,
    grid_size: int = HULL_GRID_SIZE,
    beta_grid: Optional[Sequence[float]] = None,
    label: str = "hull"
) -> TradeoffRegion:
    """
    Boundary as the lower edge of the convex hull of (0, 1/mu*) and the
    epigraph of beta -> Lambda*(beta log l)/log l.

    A finite mu* is required; letting mu* grow sends the extra point to the
    origin and the hull to the epigraph alone.

    Returns:
        TradeoffRegion with method 'hull', sampled on beta_grid
    """
    _check_precondition(dice, ell, mu_star)
    log_ell = math.log(ell)
    beta_max = dice.mean / log_ell
    span = max(1.0, beta_max)
    samples = np.linspace(0.0, span, grid_size)
    epigraph = CramerFn(dice)(samples * log_ell) / log_ell
    points = np.column_stack([samples, epigraph])
    points = np.vstack([[[0.0, 1.0 / mu_star]], points[np.isfinite(points[:, 1])]])
    chain = lower_hull(points)

    betas = (np.linspace(0.0, beta_max, BETA_GRID_SIZE) if beta_grid is None
             else np.asarray(beta_grid, dtype=float))
    heights = np.maximum(np.interp(betas, chain[:, 0], chain[:, 1]), 0.0)
    return TradeoffRegion(label, betas, heights, "hull", ell, mu_star)


def hull_check(dice: DiceDistribution, ell: int, mu_star: float, **kwargs) -> float:
    """Sup-distance between the scanned and the hull boundaries on a shared grid."""
    scan = region_boundary(dice, ell, mu_star, **kwargs)
    hull = region_hull(dice, ell, mu_star, beta_grid=scan.betas)
    return scan.sup_distance(hull)

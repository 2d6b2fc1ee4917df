"""Named region curves and their CSV/SVG emission"""
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from src.analysis.region import region_boundary
from src.export.csv_exporter import CSVExporter
from src.export.svg_exporter import TRIANGLE, SVGExporter
from src.kernels.kernel import Kernel
from src.kernels.kernel_analyzer import kernel_dice
from src.models.dice import DiceDistribution
from src.models.tradeoff_region import TradeoffRegion
from src.storage.presets import citations_for
from src.utils.logger import default_logger as logger

RS_FAMILY_MU_STAR = 3.627


def kernel_region(kernel: Kernel, mu_star: float, label: Optional[str] = None, **kwargs) -> TradeoffRegion:
    """Predicate-scan boundary of a kernel's region at mu*."""
    region = region_boundary(kernel_dice(kernel), kernel.ell, mu_star,
                             label=label or f"{kernel.name} mu*={mu_star:g}", **kwargs)
    region.metadata["mu_star"] = f"{mu_star:g}"
    citations = citations_for(mu_star)
    if citations:
        region.metadata["citation"] = "; ".join(citations)
    return region


def arikan_pair(mu_star: float, **kwargs) -> List[TradeoffRegion]:
    """
    The Arikan-kernel curve at mu* and the earlier-result reference curve.

    The reference connects (0, 1/(mu* + 1)) and (1/2, 0); it is drawn with
    the same predicate at mu* + 1.
    """
    dice = DiceDistribution.from_partial_distances([1, 2])
    current = region_boundary(dice, 2, mu_star, label=f"arikan mu*={mu_star:g}", **kwargs)
    reference = region_boundary(dice, 2, mu_star + 1.0,
                                label=f"reference 1/{mu_star + 1.0:g}", **kwargs)
    for region in (current, reference):
        region.metadata["mu_star"] = f"{region.mu_star:g}"
    return [current, reference]


def rs_family(ks: Sequence[int] = (1, 2, 3, 4), mu_star: float = RS_FAMILY_MU_STAR,
              **kwargs) -> List[TradeoffRegion]:
    """Curves of Reed-Solomon dice of length 2^k at a common mu*; k = 1 is the Arikan dice."""
    regions = []
    for k in ks:
        ell = 2 ** int(k)
        region = region_boundary(DiceDistribution.reed_solomon(ell), ell, mu_star,
                                 label=f"rs{ell} k={k}", **kwargs)
        logger.debug(f"rs family k={k}: beta intercept {region.beta_intercept}")
        regions.append(region)
    return regions


def rs_beta_intercept(k: int) -> float:
    """E[Y]/log l of the RS dice of length 2^k: log((2^k)!)/(2^k log 2^k)."""
    ell = 2 ** int(k)
    return math.lgamma(ell + 1) / (ell * math.log(ell))


def curve_emit(
    regions: Sequence[TradeoffRegion],
    csv_path: Optional[Path] = None,
    svg_path: Optional[Path] = None,
    points: Sequence[Tuple[str, float, float]] = (),
    seed: Optional[int] = None,
    title: str = ""
) -> bool:
    """
    Write region boundaries as CSV (label, beta_p, inv_mu_p, margin) and/or
    as an SVG over the (0, 1/2), (0, 0), (1, 0) triangle.

    Returns:
        True when every requested file was written
    """
    citations = sorted({c for r in regions for c in citations_for(r.mu_star)})
    ok = True
    if csv_path is not None:
        exporter = CSVExporter(seed=seed, citations=citations)
        ok &= exporter.export_regions(csv_path, regions)
    if svg_path is not None:
        description = "; ".join(citations) if citations else None
        ok &= SVGExporter(title).export_regions(svg_path, regions, points, description)
    return bool(ok)


def triangle_points() -> List[Tuple[str, float, float]]:
    return [("triangle", x, y) for x, y in TRIANGLE]

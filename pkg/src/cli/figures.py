"""Reproduction of the reference region figures"""
from pathlib import Path
from typing import List

from src.analysis.curves import arikan_pair, curve_emit, rs_family, triangle_points
from src.storage.presets import get_mu_star
from src.utils.logger import default_logger as logger

FIGURE_SETS = ("arikan_bec", "arikan_bdmc_awgn", "rs_family")


def reproduce_figures(out_dir: Path, seed: int = 0, n_jobs: int = 1) -> List[Path]:
    """
    Write CSV and SVG for the Arikan/BEC pair, the Arikan/BDMC-AWGN pair and
    the Reed-Solomon family k = 1..4.

    Returns:
        Paths written

    Raises:
        OSError: a file could not be written
    """
    out_dir = Path(out_dir)
    curve_sets = {
        "arikan_bec": (arikan_pair(get_mu_star("bec").mu_star, n_jobs=n_jobs),
                       "Arikan kernel, BEC"),
        "arikan_bdmc_awgn": (arikan_pair(get_mu_star("bdmc").mu_star, n_jobs=n_jobs),
                             "Arikan kernel, BDMC and AWGN"),
        "rs_family": (rs_family(n_jobs=n_jobs), "Reed-Solomon kernels, l = 2^k"),
    }
    written = []
    for name in FIGURE_SETS:
        regions, title = curve_sets[name]
        csv_path = out_dir / f"{name}.csv"
        svg_path = out_dir / f"{name}.svg"
        if not curve_emit(regions, csv_path, svg_path, points=triangle_points(), seed=seed,
                          title=title):
            raise OSError(f"could not write figure set {name} to {out_dir}")
        written += [csv_path, svg_path]
    logger.info(f"Wrote {len(written)} figure files to {out_dir}")
    return written

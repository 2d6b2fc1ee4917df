"""SVG figures of tradeoff regions"""
from pathlib import Path
from typing import Optional, Sequence, Tuple

import matplotlib
from matplotlib.figure import Figure

from src import __version__
from src.models.tradeoff_region import TradeoffRegion
from src.utils.logger import default_logger as logger

TRIANGLE = ((0.0, 0.5), (0.0, 0.0), (1.0, 0.0))


class SVGExporter:
    """Draw region boundaries over the reference triangle.

    Output carries no date and a fixed hash salt, so identical inputs give
    identical files.
    """

    def __init__(self, title: str = "", figsize: Tuple[float, float] = (6, 4)):
        self.title = title
        self.figsize = figsize

    def build_figure(self, regions: Sequence[TradeoffRegion],
                     points: Sequence[Tuple[str, float, float]] = ()) -> Figure:
        figure = Figure(figsize=self.figsize, dpi=100)
        ax = figure.add_subplot(111)
        xs = [p[0] for p in TRIANGLE] + [TRIANGLE[0][0]]
        ys = [p[1] for p in TRIANGLE] + [TRIANGLE[0][1]]
        ax.plot(xs, ys, color='#94a3b8', linewidth=1, linestyle='--', label='triangle')
        for region in regions:
            ax.plot(region.betas, region.inv_mus, linewidth=1.5, label=region.label)
        for label, beta, inv_mu in points:
            ax.plot([beta], [inv_mu], marker='o', markersize=3, linestyle='none', label=label)

        ax.set_xlabel("beta'")
        ax.set_ylabel("1/mu'")
        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 0.55)
        ax.grid(True, alpha=0.2, linestyle='--')
        if self.title:
            ax.set_title(self.title)
        ax.legend(fontsize=7, loc='upper right')
        figure.tight_layout()
        return figure

    def export_regions(self, output_file: Path, regions: Sequence[TradeoffRegion],
                       points: Sequence[Tuple[str, float, float]] = (),
                       description: Optional[str] = None) -> bool:
        """
        Write an SVG with the triangle, every boundary and optional points.

        Returns:
            True if export successful
        """
        try:
            output_file = Path(output_file)
            output_file.parent.mkdir(parents=True, exist_ok=True)
            figure = self.build_figure(regions, points)
            metadata = {"Date": None, "Creator": f"polarforge {__version__}"}
            if description:
                metadata["Description"] = description
            with matplotlib.rc_context({"svg.hashsalt": "polarforge", "svg.fonttype": "none"}):
                figure.savefig(output_file, format="svg", metadata=metadata)
            logger.info(f"Exported figure with {len(regions)} curves to {output_file}")
            return True

        except Exception as e:
            logger.error(f"Error exporting {output_file}: {e}")
            return False

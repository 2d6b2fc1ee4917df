"""CSV export of regions, trees, selections and simulation reports"""
import csv
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import pandas as pd

from src import __version__
from src.construction.tree_builder import leaf_frame_rows
from src.models.selection import SelectionDiagnostics
from src.models.simulation import SimReport
from src.models.tradeoff_region import TradeoffRegion
from src.utils.helpers import format_real
from src.utils.logger import default_logger as logger

REGION_COLUMNS = ["label", "beta_p", "inv_mu_p", "margin"]
TREE_COLUMNS = ["leaf_id", "depth", "ln_z", "P"]
SELECTION_COLUMNS = ["leaf_id", "ln_z"]
DIAGNOSTIC_COLUMNS = ["m", "a", "b", "c", "d", "e", "e0", "f", "g", "note"]
SIM_COLUMNS = ["leaf_id", "analytic_lnZ", "empirical_rate", "ci_low", "ci_high"]


def _cell(value) -> str:
    if isinstance(value, float):
        return format_real(value)
    return str(value)


class CSVExporter:
    """Write CSV artifacts behind a fixed metadata header.

    The header holds the tool version, the seed and any preset citations,
    never a timestamp, so reruns of one configuration are byte-identical.
    """

    def __init__(self, seed: Optional[int] = None, citations: Sequence[str] = (),
                 extra: Optional[dict] = None):
        """
        Initialize CSV exporter.

        Args:
            seed: Seed of the run, if any
            citations: Provenance of imported constants
            extra: Additional key/value metadata lines
        """
        self.seed = seed
        self.citations = list(citations)
        self.extra = dict(extra or {})

    def header_lines(self) -> List[str]:
        lines = [f"# tool: polarforge {__version__}"]
        if self.seed is not None:
            lines.append(f"# seed: {self.seed}")
        for key in sorted(self.extra):
            lines.append(f"# {key}: {self.extra[key]}")
        for citation in self.citations:
            lines.append(f"# citation: {citation}")
        return lines

    def export_rows(self, output_file: Path, columns: Sequence[str],
                    rows: Iterable[Sequence], footer: Iterable[Sequence] = ()) -> bool:
        """
        Write a header, column names, rows and optional footer rows.

        Returns:
            True if export successful
        """
        try:
            output_file = Path(output_file)
            output_file.parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, 'w', newline='', encoding='utf-8') as f:
                for line in self.header_lines():
                    f.write(line + "\n")
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(columns)
                count = 0
                for row in rows:
                    writer.writerow([_cell(v) for v in row])
                    count += 1
                for row in footer:
                    writer.writerow([_cell(v) for v in row])
            logger.info(f"Exported {count} rows to {output_file}")
            return True

        except Exception as e:
            logger.error(f"Error exporting {output_file}: {e}")
            return False

    def export_frame(self, output_file: Path, frame: pd.DataFrame) -> bool:
        """Write a DataFrame with the metadata header."""
        rows = (tuple(r) for r in frame.itertuples(index=False, name=None))
        return self.export_rows(output_file, list(frame.columns), rows)

    def export_regions(self, output_file: Path, regions: Sequence[TradeoffRegion]) -> bool:
        """label, beta_p, inv_mu_p, margin per boundary point; header only when empty."""
        rows = (row for region in regions for row in region.rows())
        return self.export_rows(output_file, REGION_COLUMNS, rows)

    def export_tree(self, output_file: Path, tree) -> bool:
        """One row per leaf (or leaf class of a merged tree)."""
        return self.export_rows(output_file, TREE_COLUMNS, leaf_frame_rows(tree))

    def export_selection(self, output_file: Path, tree, A) -> bool:
        ids = tree.validate_leaf_set(A)
        return self.export_rows(output_file, SELECTION_COLUMNS,
                                zip(ids.tolist(), tree.ln_z_of(ids).tolist()))

    def export_diagnostics(self, output_file: Path, diag: SelectionDiagnostics) -> bool:
        rows = ([row[c] for c in DIAGNOSTIC_COLUMNS] for row in diag.to_rows())
        footer = [["# note", note] for note in diag.notes]
        return self.export_rows(output_file, DIAGNOSTIC_COLUMNS, rows, footer)

    def export_simulation(self, output_file: Path, report: SimReport) -> bool:
        """Per-leaf rows followed by bler, bler_ci and union_bound footer rows."""
        lo, hi = report.bler_ci
        footer = [["bler", report.bler], ["bler_ci", lo, hi],
                  ["union_bound", report.union_bound, report.ln_union_bound]]
        return self.export_rows(output_file, SIM_COLUMNS, report.rows(), footer)

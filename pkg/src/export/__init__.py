"""Export package: CSV tables and SVG figures"""
from src.export.csv_exporter import CSVExporter
from src.export.svg_exporter import SVGExporter

__all__ = ['CSVExporter', 'SVGExporter']

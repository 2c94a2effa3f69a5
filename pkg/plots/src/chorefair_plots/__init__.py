"""Heatmap rendering for chorefair experiment CSVs."""

from .heatmap import HeatmapGrid, PlotInputError, build_grid, load_records, render_heatmap

__all__ = ["HeatmapGrid", "PlotInputError", "build_grid", "load_records", "render_heatmap"]

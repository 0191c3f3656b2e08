"""Figure rendering for regimefrontier CSV/JSON artifacts.

Consumes only the published file contract (frontier and solutions CSVs with
their JSON headers); no code is shared with the solver package.
"""
from .errors import EmptySeries, MissingColumn, NegativeVariance, PlotInputError
from .figures import (
    SERIES_COLORS,
    STYLE,
    frontier_overlay_figure,
    save_figure,
    solutions_figure,
)
from .io import FrontierSeries, SolutionTable, read_frontier_csv, read_solutions_csv

__version__ = "0.1.0"

__all__ = [
    "PlotInputError",
    "MissingColumn",
    "EmptySeries",
    "NegativeVariance",
    "FrontierSeries",
    "SolutionTable",
    "read_frontier_csv",
    "read_solutions_csv",
    "frontier_overlay_figure",
    "solutions_figure",
    "save_figure",
    "SERIES_COLORS",
    "STYLE",
    "__version__",
]

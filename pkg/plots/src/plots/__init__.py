"""Figure rendering over the mlcavity CSV artifact contract."""

from .io import PlotDataError, Table, read_table
from .render import render

__version__ = "0.1.0"

__all__ = ["PlotDataError", "Table", "read_table", "render"]

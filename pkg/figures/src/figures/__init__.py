from .io import COLUMNS, Row, SchemaError, load_rows
from .refit import loglog_slope, primary_slope, series_slope
from .render import KINDS, FigureSpec, RenderReport, render

__all__ = [
    "COLUMNS",
    "FigureSpec",
    "KINDS",
    "RenderReport",
    "Row",
    "SchemaError",
    "load_rows",
    "loglog_slope",
    "primary_slope",
    "render",
    "series_slope",
]

"""Figures over manetsim results CSVs."""

from .figures import (
    CSV_COLUMNS,
    FigureSpec,
    NoDataError,
    RenderInfo,
    SchemaError,
    fit_loglog,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_COLUMNS", "FigureSpec", "NoDataError", "RenderInfo", "SchemaError",
    "fit_loglog", "render",
]

"""Figure rendering for salea experiment CSVs."""

from .figures import KINDS, FigureSpec, SchemaError, build_figure, render

__version__ = "0.1.0"

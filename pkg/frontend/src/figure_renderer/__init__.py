"""Offline figure rendering for SNR sweep CSVs.

Consumes the simulator CLI's outputs (one CSV per scenario plus a merged
meta.json) and draws SNR-vs-N curves with optional asymptote reference
lines. Plotted numbers are never recomputed here; they come verbatim from
the CSV cells and meta fields.
"""

__version__ = "0.1.0"

from .figures import (
    DEFAULT_SPECS,
    FigureSpec,
    RenderSummary,
    figure_spec_for,
    group_series,
    render,
)
from .schema import (
    REQUIRED_COLUMNS,
    SchemaError,
    SweepPoint,
    load_meta,
    read_sweep,
    reference_lines_for,
)

__all__ = [
    "DEFAULT_SPECS",
    "FigureSpec",
    "REQUIRED_COLUMNS",
    "RenderSummary",
    "SchemaError",
    "SweepPoint",
    "figure_spec_for",
    "group_series",
    "load_meta",
    "read_sweep",
    "reference_lines_for",
    "render",
    "__version__",
]

"""Figure regeneration from corvx result CSVs."""

from corvx_figures.render import (
    KINDS,
    PlotSpec,
    SchemaError,
    SWEEP_COLUMNS,
    TRAJECTORY_COLUMNS,
    render,
    render_to_array,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "PlotSpec",
    "SchemaError",
    "SWEEP_COLUMNS",
    "TRAJECTORY_COLUMNS",
    "render",
    "render_to_array",
]

"""figrender: SVG panel rendering for matchlab experiment CSVs."""

__version__ = "0.1.0"

from .panels import (
    EmptyData,
    MissingColumn,
    PanelSpec,
    RenderError,
    load_manifest,
    render_all,
    render_panel,
)

"""Publication-style figures for delay-network auction sweeps."""

from .figures import (EmptySelectionError, FIGURE_IDS, FigureSpec,
                      LOG_ZERO_FLOOR, RenderSummary, SchemaError, render)

__all__ = ["EmptySelectionError", "FIGURE_IDS", "FigureSpec",
           "LOG_ZERO_FLOOR", "RenderSummary", "SchemaError", "render"]
__version__ = "0.1.0"

"""Figure regeneration for flapsim CSV outputs."""

__version__ = "0.1.0"

from .render import KINDS, PlotError, PlotSpec, check, render

__all__ = ["KINDS", "PlotError", "PlotSpec", "check", "render", "__version__"]

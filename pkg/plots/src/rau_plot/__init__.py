"""Figure rendering for rau CSV outputs."""

from .render import (KINDS, PlotJob, SchemaError, plot_elements,
                     plot_factors, plot_phase)

__all__ = ["KINDS", "PlotJob", "SchemaError", "plot_elements",
           "plot_factors", "plot_phase"]

__version__ = "0.1.0"

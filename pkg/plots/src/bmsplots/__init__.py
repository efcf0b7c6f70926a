"""Two-panel equilibrium-premium figures from sweep CSV files."""

from .render import FigureSpec, SweepSeries, load_series, render_figure

__all__ = ["FigureSpec", "SweepSeries", "load_series", "render_figure"]

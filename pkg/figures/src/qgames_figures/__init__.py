"""Figure generation for qgames simulation output."""

__version__ = "0.1.0"

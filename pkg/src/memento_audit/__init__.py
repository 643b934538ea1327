"""Tools for measuring how completely archived web pages replay."""

__version__ = "0.1.0"

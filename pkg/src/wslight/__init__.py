"""Whittaker-Shannon decomposition of squeezed light and its photodetection statistics."""

__version__ = "0.1.0"

"""Numerical exploration of iterated function systems on the circle."""

__version__ = "0.1.0"

"""Indices of vector fields and line fields on surfaces, with and without boundary."""

__version__ = "0.1.0"

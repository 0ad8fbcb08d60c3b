"""Numerical companion for high-frequency waves in multidimensional scalar conservation laws."""

__version__ = "0.1.0"

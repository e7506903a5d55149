"""Fractal interpolation surfaces: construction, attractors, dimensions and certificates."""

__version__ = "0.1.0"

"""Thermal Casimir-Polder potentials of fullerene-like molecules near planar surfaces."""

__version__ = "0.1.0"

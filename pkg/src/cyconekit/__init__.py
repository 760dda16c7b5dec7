"""Toolkit for toric Calabi-Yau cones, their deformations and resolutions."""

__version__ = "0.1.0"

"""Numerical tools for polyharmonic Choquard-type inequalities."""

__version__ = "0.1.0"

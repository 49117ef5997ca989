"""Discrete fractal uncertainty principles for Cantor sets in Z_N x Z_N."""

__version__ = "0.1.0"

"""Exact algebra and numerics for smooth valuations on convex functions."""

from .poly import MatShape, Polynomial, parse_poly
from .scalars import GaussianRational

__all__ = ["MatShape", "Polynomial", "parse_poly", "GaussianRational"]
__version__ = "0.1.0"

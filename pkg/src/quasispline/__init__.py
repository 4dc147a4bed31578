"""Multiscale B-spline quasi-interpolation on dyadic decompositions of bounded domains."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

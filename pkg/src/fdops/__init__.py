"""Finite-difference stencil compiler targeting the OPS parallel-loop API."""
from . import executor, opsgen, pipeline, roofline, symbolic
from .pipeline import build
from .symbolic import Equation, Grid, GridFunction

__version__ = "0.1.0"

__all__ = ["executor", "opsgen", "pipeline", "roofline", "symbolic", "build", "Equation",
           "Grid", "GridFunction"]

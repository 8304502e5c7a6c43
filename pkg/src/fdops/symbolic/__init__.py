"""Symbolic front end: grids, grid functions, FD operators and the forward solve."""
from .expr import (Add, Derivative, Dimension, Expr, Indexed, Mul, Number, Pow, Symbol,
                   TimeSeries, add, expand, mul, power, subs)
from .fd import FDOrderError, derivative, dt, dt2, expand_fd, fd_coefficients, laplace
from .grid import Equation, Grid, GridFunction
from .solve import SolveError, collect_linear, solve_forward

__all__ = [
    "Add", "Derivative", "Dimension", "Expr", "Indexed", "Mul", "Number", "Pow", "Symbol",
    "TimeSeries", "add", "expand", "mul", "power", "subs", "FDOrderError", "derivative",
    "dt", "dt2", "expand_fd", "fd_coefficients", "laplace", "Equation", "Grid",
    "GridFunction", "SolveError", "collect_linear", "solve_forward",
]

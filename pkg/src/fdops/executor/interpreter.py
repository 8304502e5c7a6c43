"""Vectorised reference interpreter for IETs.

Each loop nest is evaluated for its whole iteration box at once; the cluster
invariant (no write read back at another offset) makes this equivalent to the
scalar loop order.  Operation order inside an expression follows
:func:`~fdops.symbolic.expr.split_add` and
:func:`~fdops.symbolic.expr.split_mul`, the same order the C printer emits.
"""
import time
from dataclasses import dataclass

import numpy as np

from ..pipeline.iet import ExprStatement, SpaceLoop, iet_functions
from ..symbolic.expr import (Dimension, Indexed, Symbol, TimeSeries, split_add,
                             split_mul)
from .fields import allocate

__all__ = ["evaluate", "run", "RunResult", "InstabilityError", "HaloAccessError"]


class InstabilityError(FloatingPointError):
    def __init__(self, step):
        super().__init__(f"non-finite value at time step {step}")
        self.step = step


class HaloAccessError(IndexError):
    pass


@dataclass
class RunResult:
    fields: dict
    max_abs: list
    steps: int
    levels: int
    wall_time: float = 0.0

    def final(self, name="u"):
        """Interior of the most recently written level of time function ``name``."""
        f = self.fields[name]
        return f.interior(self.steps % self.levels)


def _fold(values, op):
    acc = values[0]
    for v in values[1:]:
        acc = op(acc, v)
    return acc


def evaluate(e, lookup, dtype=np.float32):
    """Evaluate ``e``; ``lookup(leaf)`` supplies values for symbols and accesses."""
    if e.is_Number:
        return dtype(float(e.value))
    if e.is_Atom:
        return lookup(e)
    ev = lambda x: evaluate(x, lookup, dtype)  # noqa: E731
    if e.is_Add:
        return _fold([ev(a) for a in split_add(e)], np.add)
    if e.is_Pow:
        p = _fold([ev(e.base)] * abs(e.exp), np.multiply)
        return dtype(1) / p if e.exp < 0 else p
    if e.is_Mul:
        coeff, num, den = split_mul(e)
        vals = ([dtype(float(abs(coeff)))] if abs(coeff) != 1 else []) + [ev(f) for f in num]
        out = _fold(vals, np.multiply) if vals else dtype(1)
        if coeff < 0:
            out = -out
        if den:
            out = out / _fold([ev(f) for f in den], np.multiply)
        return out
    raise TypeError(f"cannot evaluate {type(e).__name__}")


class _Machine:
    def __init__(self, iet, fields, scalars, series, dtype, check_bounds):
        self.iet = iet
        self.grid = iet.grid
        self.fields = fields
        self.scalars = scalars
        self.series = series
        self.dtype = dtype
        self.check_bounds = check_bounds
        self.step = 0
        self.temps = {}
        self.written = set()

    # value lookup for leaves
    def lookup(self, box, leaf):
        if isinstance(leaf, Indexed):
            return self.fields[leaf.function.name].data[self.index(box, leaf)]
        if isinstance(leaf, Dimension):
            axis = self.grid.dimensions.index(leaf)
            lo, hi = box[axis]
            shape = [1] * self.grid.ndim
            shape[axis] = hi - lo + 1
            return np.arange(lo, hi + 1, dtype=self.dtype).reshape(shape)
        if leaf in self.temps:
            return self.temps[leaf]
        if isinstance(leaf, TimeSeries):
            return self.dtype(self.series[leaf.name][self.step])
        if isinstance(leaf, Symbol):
            try:
                return self.dtype(self.scalars[leaf.name])
            except KeyError:
                raise KeyError(f"no value supplied for symbol {leaf.name!r}") from None
        raise TypeError(f"unexpected leaf {leaf!r}")

    def index(self, box, acc):
        f = acc.function
        field_ = self.fields[f.name]
        h = f.halo
        idx = []
        if f.is_time_function:
            idx.append(self.iet.buffer(self.step, acc.time_offset))
        for axis, (rng, off) in enumerate(zip(box, acc.offsets)):
            if rng is None:
                raise ValueError(f"{acc} evaluated outside its loop over axis {axis}")
            lo, hi = rng[0] + off + h, rng[1] + off + h
            if self.check_bounds:
                extent = field_.data.shape[-self.grid.ndim + axis]
                if lo < 0 or hi >= extent:
                    raise HaloAccessError(
                        f"{acc} reads [{lo}, {hi}] outside allocated [0, {extent - 1}]")
            idx.append(slice(lo, hi + 1))
        return tuple(idx)

    def execute(self, node, box):
        if isinstance(node, SpaceLoop):
            axis = self.grid.dimensions.index(node.dim)
            inner = list(box)
            inner[axis] = (node.bound.lower, node.bound.upper)
            for child in node.body:
                self.execute(child, inner)
        elif isinstance(node, ExprStatement):
            if node.point is not None:
                box = [(p, p) for p in node.point]
            look = lambda leaf: self.lookup(box, leaf)  # noqa: E731
            for s, v in node.temps:
                self.temps[s] = evaluate(v, look, self.dtype)
            for target, v in node.stores:
                value = evaluate(v, look, self.dtype)
                dst = self.fields[target.function.name].data
                idx = self.index(box, target)
                dst[idx] = np.broadcast_to(value, dst[idx].shape)
                if target.function.is_time_function:
                    self.written.add((target.function.name, idx[0]))
        else:
            raise TypeError(f"cannot execute {type(node).__name__}")


def run(iet, initial=None, scalars=None, series=None, dtype=np.float32, callback=None,
        check_bounds=True):
    """Execute ``iet`` for its number of time steps.

    ``initial`` maps time-invariant function names to interior arrays,
    ``scalars`` maps symbol names (``dt``, ``h_x``...) to values and
    ``series`` maps :class:`TimeSeries` names to per-step arrays.
    ``callback(step, fields)`` runs after every step.
    """
    initial = initial or {}
    fields = {f.name: allocate(f, initial.get(f.name), dtype) for f in iet_functions(iet)}
    for f in fields.values():
        if f.function.is_time_function and f.function.levels != iet.levels:
            raise ValueError(f"{f.function.name} has {f.function.levels} time levels, "
                             f"the time loop rotates {iet.levels}")
    m = _Machine(iet, fields, dict(scalars or {}), dict(series or {}), dtype, check_bounds)
    max_abs = []
    box = [None] * iet.grid.ndim
    t0 = time.perf_counter()
    # blow-ups are reported as InstabilityError, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(iet.steps):
            m.step = step
            m.temps.clear()
            m.written.clear()
            for node in iet.body:
                m.execute(node, box)
            peak = 0.0
            for name, level in sorted(m.written):
                arr = fields[name].data[level]
                if not np.all(np.isfinite(arr)):
                    raise InstabilityError(step)
                peak = max(peak, float(np.max(np.abs(fields[name].interior(level)))))
            max_abs.append(peak)
            if callback is not None:
                callback(step, fields)
    return RunResult(fields, max_abs, iet.steps, iet.levels, time.perf_counter() - t0)

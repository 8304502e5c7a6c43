from dataclasses import dataclass

from ..symbolic.expr import Indexed, preorder
from ..symbolic.fd import expand_fd
from ..symbolic.solve import solve_forward

__all__ = ["Bound", "Cluster", "lower", "accessed_functions"]


@dataclass(frozen=True)
class Bound:
    """Inclusive loop bounds ``lower <= dim <= upper``."""

    dim: object
    lower: int
    upper: int

    @property
    def lower_name(self):
        return f"{self.dim.name}_m"

    @property
    def upper_name(self):
        return f"{self.dim.name}_M"

    @property
    def size(self):
        return self.upper - self.lower + 1


@dataclass(frozen=True)
class Cluster:
    """Equations sharing one iteration space.

    ``exprs`` holds ``(target access, update expression)`` pairs.  Point
    clusters have an empty ``iteration_space`` and a ``point``.
    """

    grid: object
    exprs: tuple
    iteration_space: tuple = ()
    point: tuple = None

    @property
    def dimensions(self):
        return tuple(b.dim for b in self.iteration_space)

    @property
    def is_point(self):
        return self.point is not None

    def functions(self):
        return accessed_functions(self.exprs)


def accessed_functions(exprs):
    """Functions touched by ``(target, update)`` pairs, in first-appearance order."""
    seen = {}
    for target, update in exprs:
        for e in (target, update):
            for n in preorder(e):
                if isinstance(n, Indexed):
                    seen.setdefault(n.function, None)
    return list(seen)


def _interior_bounds(grid, exprs):
    halo = max(f.halo for f in accessed_functions(exprs))
    bounds = []
    for d, n in zip(grid.dimensions, grid.shape):
        if n - 2 * halo < 1:
            raise ValueError(f"grid too small along {d.name} for halo {halo}")
        bounds.append(Bound(d, halo, n - 1 - halo))
    return tuple(bounds)


def _conflicts(exprs):
    writes = {}
    for target, _ in exprs:
        writes.setdefault((target.function, target.time_offset), set()).add(target.offsets)
    for target, update in exprs:
        for n in preorder(update):
            if isinstance(n, Indexed):
                w = writes.get((n.function, n.time_offset))
                if w and (n.offsets not in w or len(w) > 1):
                    return True
    return False


def lower(equations, targets):
    """Solve, FD-expand and group equations into clusters.

    Consecutive equations over the same iteration space share a cluster as
    long as no write is read back at a different offset within it.
    """
    if len(equations) != len(targets):
        raise ValueError("need one target per equation")
    clusters = []
    for eq, target in zip(equations, targets):
        if eq.point is not None:
            lhs = eq.lhs
            if not (isinstance(lhs, Indexed) and lhs.function == target):
                raise ValueError(f"point update must assign an access of {target.name}")
            pair = (lhs, expand_fd(eq.rhs))
            space, point = (), eq.point
            for p, n in zip(point, target.grid.shape):
                if not 0 <= p < n:
                    raise ValueError(f"point {point} outside grid {target.grid.shape}")
        else:
            pair = (target.forward, solve_forward(eq, target))
            space, point = _interior_bounds(target.grid, [pair]), None
        last = clusters[-1] if clusters else None
        if last is not None and last.point == point and last.iteration_space == space:
            merged = last.exprs + (pair,)
            if not _conflicts(merged):
                if point is None:
                    space = _interior_bounds(target.grid, merged)
                clusters[-1] = Cluster(target.grid, merged, space, point)
                continue
        clusters.append(Cluster(target.grid, (pair,), space, point))
    return clusters

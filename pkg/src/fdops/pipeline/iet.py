"""Iteration/expression tree: the loop nest handed to the back ends."""
from dataclasses import dataclass

from ..symbolic.expr import Indexed, preorder

__all__ = ["ExprStatement", "SpaceLoop", "TimeLoop", "KernelCallSite", "build_iet",
           "walk", "find", "iet_functions"]


@dataclass(frozen=True)
class ExprStatement:
    """Temp bindings followed by stores, evaluated at every point of the
    enclosing loops (or at ``point`` for point updates)."""

    temps: tuple = ()
    stores: tuple = ()
    point: tuple = None

    @property
    def children(self):
        return ()


@dataclass(frozen=True)
class SpaceLoop:
    bound: object
    body: tuple

    @property
    def dim(self):
        return self.bound.dim

    @property
    def children(self):
        return self.body


@dataclass(frozen=True)
class KernelCallSite:
    """Placeholder for an outlined loop nest (one OPS parallel loop)."""

    name: str
    cluster: object

    @property
    def children(self):
        return ()


@dataclass(frozen=True)
class TimeLoop:
    """Outermost loop over ``steps`` steps with ``levels`` rotating buffers.

    At step ``t`` an access at time offset ``k`` hits buffer ``(t + k) % levels``.
    """

    dim: object
    steps: int
    levels: int
    body: tuple
    grid: object = None

    @property
    def children(self):
        return self.body

    def buffer(self, step, offset):
        return (step + offset) % self.levels

    def current(self, steps_done):
        return steps_done % self.levels


def walk(node):
    yield node
    for c in node.children:
        yield from walk(c)


def find(node, kind):
    return [n for n in walk(node) if isinstance(n, kind)]


def iet_functions(iet):
    """Grid functions referenced anywhere in the tree, first-appearance order."""
    seen = {}
    for st in find(iet, ExprStatement):
        for e in [v for _, v in st.temps] + [x for pair in st.stores for x in pair]:
            for n in preorder(e):
                if isinstance(n, Indexed):
                    seen.setdefault(n.function, None)
    return list(seen)


def _nest(oc):
    bounds = oc.cluster.iteration_space
    dims = [b.dim for b in bounds]
    by_level = {i: [] for i in range(-1, len(dims))}
    for s, v in oc.hoisted:
        deps = oc.levels.get(s, frozenset())
        by_level[max((dims.index(d) for d in deps), default=-1)].append((s, v))

    def level(i):
        inner = []
        if by_level[i]:
            inner.append(ExprStatement(tuple(by_level[i])))
        if i + 1 < len(dims):
            inner.append(SpaceLoop(bounds[i + 1], level(i + 1)))
        else:
            inner.append(ExprStatement(tuple(oc.local_temps), tuple(oc.exprs)))
        return tuple(inner)

    out = []
    if by_level[-1]:
        out.append(ExprStatement(tuple(by_level[-1])))
    out.append(SpaceLoop(bounds[0], level(0)))
    return out


def build_iet(ocs, time_steps, time_order):
    """Wrap optimized clusters in a time loop with ``time_order + 1`` buffers."""
    if not ocs:
        raise ValueError("need at least one cluster")
    if time_steps < 1:
        raise ValueError(f"time_steps must be >= 1, got {time_steps}")
    body = []
    for oc in ocs:
        c = oc.cluster
        if c.is_point:
            body.append(ExprStatement(tuple(oc.temps), tuple(oc.exprs), c.point))
        else:
            body.extend(_nest(oc))
    grid = ocs[0].cluster.grid
    return TimeLoop(grid.time_dim, int(time_steps), int(time_order) + 1, tuple(body), grid)

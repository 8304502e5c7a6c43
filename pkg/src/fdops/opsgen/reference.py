"""Plain nested-loop C for an IET (no OPS API).

Used for golden-file diffing and as a cross-check of the executor: the text
computes exactly what :func:`fdops.executor.run` computes.
"""
from ..pipeline.iet import ExprStatement, SpaceLoop, iet_functions, walk
from ..symbolic.expr import Indexed, Symbol, TimeSeries, preorder
from .printer import CPrinter

__all__ = ["emit_reference_c", "ReferencePrinter"]


class ReferencePrinter(CPrinter):
    """Accesses print as ``u[t1][x + 2][y + 2]``; ``point`` pins the indices."""

    def __init__(self, levels, point=None):
        self.levels = levels
        self.point = point

    def leaf(self, e):
        if isinstance(e, Indexed):
            return self.access(e)
        if isinstance(e, TimeSeries):
            return f"{e.name}[time]"
        return super().leaf(e)

    def access(self, e):
        f = e.function
        idx = []
        if f.is_time_function:
            idx.append(f"t{e.time_offset % self.levels}")
        for i, (d, o) in enumerate(zip(f.grid.dimensions, e.offsets)):
            if self.point is not None:
                idx.append(str(self.point[i] + o + f.halo))
            else:
                k = o + f.halo
                idx.append(d.name if k == 0 else f"{d.name} + {k}" if k > 0
                           else f"{d.name} - {-k}")
        return e.function.name + "".join(f"[{i}]" for i in idx)


def _bound_names(iet):
    """Name every distinct loop bound: ``x_m``/``x_M``, then ``x_m1``/``x_M1``..."""
    names = {}
    per_dim = {}
    for node in walk(iet):
        if isinstance(node, SpaceLoop):
            b = node.bound
            if b not in names:
                k = per_dim.get(b.dim, 0)
                per_dim[b.dim] = k + 1
                sfx = "" if k == 0 else str(k)
                names[b] = (b.lower_name + sfx, b.upper_name + sfx)
    return names


def _leaf_names(iet, pred):
    out = []
    for st in walk(iet):
        if isinstance(st, ExprStatement):
            for e in [v for _, v in st.temps] + [v for _, v in st.stores]:
                for n in preorder(e):
                    if pred(n) and n.name not in out:
                        out.append(n.name)
    return out


def emit_reference_c(iet, name="kernel"):
    """C function running every time step of ``iet`` over ``t0``/``t1``/... buffers."""
    levels = iet.levels
    grid = iet.grid
    bounds = _bound_names(iet)
    params = []
    for f in iet_functions(iet):
        shape = "".join(f"[{n + 2 * f.halo}]" for n in grid.shape)
        if f.is_time_function:
            params.append(f"float {f.name}[{levels}]{shape}")
        else:
            params.append(f"const float {f.name}{shape}")
    params += [f"const float {s}" for s in _leaf_names(iet, lambda n: type(n) is Symbol)]
    params += [f"const float *{s}"
               for s in _leaf_names(iet, lambda n: isinstance(n, TimeSeries))]
    L = [f"void {name}({', '.join(params)})", "{"]
    for b, (lo, hi) in bounds.items():
        L.append(f"  const int {lo} = {b.lower}, {hi} = {b.upper};")
    L.append(f"  for (int time = 0; time <= {iet.steps - 1}; time += 1)")
    L.append("  {")
    for j in range(levels):
        L.append(f"    int t{j} = (time + {j}) % {levels};")

    def emit(node, depth):
        pad = "  " * depth
        if isinstance(node, SpaceLoop):
            lo, hi = bounds[node.bound]
            d = node.dim.name
            L.append(f"{pad}for (int {d} = {lo}; {d} <= {hi}; {d} += 1)")
            L.append(f"{pad}{{")
            for c in node.body:
                emit(c, depth + 1)
            L.append(f"{pad}}}")
        else:
            pr = ReferencePrinter(levels, node.point)
            for s, v in node.temps:
                L.append(f"{pad}float {s.name} = {pr(v)};")
            for t, v in node.stores:
                L.append(f"{pad}{pr(t)} = {pr(v)};")

    # each cluster gets its own block so temp names may repeat across clusters
    body = list(iet.body)
    while body:
        node = body.pop(0)
        L.append("    {")
        emit(node, 3)
        if isinstance(node, ExprStatement) and node.point is None and body:
            emit(body.pop(0), 3)   # the loop nest reading these hoisted temps
        L.append("    }")
    L.append("  }")
    L.append("}")
    return "\n".join(L) + "\n"

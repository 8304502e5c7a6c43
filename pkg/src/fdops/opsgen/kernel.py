"""Outlining of optimized clusters into OPS user kernels."""
from dataclasses import dataclass, field

from ..symbolic.expr import Dimension, Indexed, Symbol, TimeSeries, preorder
from .printer import CPrinter
from .translate import AccessMode, ArgRegistry, make_ops_ast

__all__ = ["OpsKernel", "KernelPrinter", "outline_kernel", "kernel_source"]


@dataclass
class OpsKernel:
    """An outlined loop body.

    ``temps`` and ``stores`` are already in macro form; ``consts`` are
    loop-invariant temps computed once on the host and published with
    ``ops_decl_const``; ``iteration_range`` is inclusive per dimension.
    """

    name: str
    args: list
    temps: list
    stores: list
    iteration_range: tuple
    consts: list = field(default_factory=list)
    globals: list = field(default_factory=list)
    uses_idx: bool = False

    @property
    def ndim(self):
        return len(self.iteration_range)

    @property
    def body(self):
        return list(self.temps) + list(self.stores)

    def scalars(self):
        """Plain symbols (``dt``, ``h_x``...) the body and consts read."""
        seen = {}
        exprs = [v for _, v in self.temps] + [v for _, v in self.stores] + \
                [v for _, v in self.consts]
        for e in exprs:
            for n in preorder(e):
                if type(n) is Symbol:
                    seen.setdefault(n.name, None)
        return list(seen)


def _is_host_constant(e):
    return not any(isinstance(n, (Indexed, Dimension, TimeSeries)) for n in preorder(e))


def outline_kernel(oc, name):
    """Turn an :class:`OptimizedCluster` into an :class:`OpsKernel`.

    The store target is ``OPS_ACC0``; reads follow in first-appearance order.
    """
    cluster = oc.cluster
    if cluster.is_point:
        rng = tuple((p, p) for p in cluster.point)
        candidates, consts = list(oc.temps), []
    else:
        rng = tuple((b.lower, b.upper) for b in cluster.iteration_space)
        consts = [(s, v) for s, v in oc.hoisted if _is_host_constant(v)]
        const_names = {s for s, _ in consts}
        candidates = [(s, v) for s, v in oc.temps if s not in const_names]
    registry = ArgRegistry()
    # register store targets first so the (first) write gets OPS_ACC0
    targets = [registry.access(t, AccessMode.write) for t, _ in oc.exprs]
    temps = [(s, make_ops_ast(v, registry)) for s, v in candidates]
    stores = [(t, make_ops_ast(v, registry)) for t, (_, v) in zip(targets, oc.exprs)]
    body = [v for _, v in temps + stores]
    globals_ = []
    uses_idx = False
    for e in body:
        for n in preorder(e):
            if isinstance(n, TimeSeries) and n.name not in globals_:
                globals_.append(n.name)
            elif isinstance(n, Dimension):
                uses_idx = True
    return OpsKernel(name, registry.args, temps, stores, rng, consts, globals_, uses_idx)


class KernelPrinter(CPrinter):
    def __init__(self, dims=()):
        self.dims = list(dims)

    def leaf(self, e):
        if isinstance(e, TimeSeries):
            return f"(*{e.name})"
        if isinstance(e, Dimension):
            return f"(float)(idx[{self.dims.index(e)}])"
        return super().leaf(e)


def kernel_source(k, dims):
    """C definition of kernel ``k``; ``dims`` are the grid's space dimensions."""
    params = []
    for a in k.args:
        const = "const " if a.access_mode is AccessMode.read else ""
        params.append(f"{const}float *{a.dat_name}")
    params += [f"const float *{g}" for g in k.globals]
    if k.uses_idx:
        params.append("const int *idx")
    pr = KernelPrinter(dims)
    lines = [f"void {k.name}({', '.join(params)})", "{"]
    for s, v in k.temps:
        lines.append(f"  float {s.name} = {pr(v)};")
    for t, v in k.stores:
        lines.append(f"  {t} = {pr(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


"""Symbolic optimization of clusters (flop reduction).

``basic`` leaves the update expressions untouched.  ``aggressive`` runs, in
order: numeric-coefficient factorization, common-subexpression elimination
and hoisting of loop-invariant subexpressions.
"""
import enum
from collections import Counter
from dataclasses import dataclass, field

from ..symbolic.expr import (Dimension, Indexed, Symbol, add, as_coeff_term, mul, preorder,
                             split_mul, subs)

__all__ = ["DseLevel", "Temp", "OptimizedCluster", "optimize", "flop_count", "count_ops",
           "factorize", "cse", "inline_temps"]


class DseLevel(str, enum.Enum):
    basic = "basic"
    aggressive = "aggressive"


class Temp(Symbol):
    """Compiler-generated scalar temporary."""


@dataclass(frozen=True)
class OptimizedCluster:
    cluster: object
    exprs: tuple
    hoisted: tuple = ()
    local_temps: tuple = ()
    flop_count: int = 0
    # hoisted temp -> frozenset of space dimensions it depends on
    levels: dict = field(default_factory=dict, compare=False)

    @property
    def temps(self):
        return self.hoisted + self.local_temps


# ---------------------------------------------------------------------------
# operation counting

def count_ops(e):
    """Scalar +, -, *, / operations needed to evaluate ``e`` once.

    Negation is free; ``x**n`` costs ``|n| - 1`` multiplies plus one divide
    when standalone and negative; a product divides once by its combined
    denominator.
    """
    if e.is_Atom:
        return 0
    if e.is_Add:
        return len(e.args) - 1 + sum(count_ops(a) for a in e.args)
    if e.is_Pow:
        n = abs(e.exp)
        return n - 1 + (1 if e.exp < 0 else 0) + count_ops(e.base)
    if e.is_Mul:
        coeff, num, den = split_mul(e)
        factors = num + ([None] if abs(coeff) != 1 else [])
        ops = max(len(factors) - 1, 0)
        if den:
            ops += len(den)   # len(den) - 1 products plus one division
        return ops + sum(count_ops(f) for f in num + den)
    return sum(count_ops(a) for a in e.args)


def flop_count(oc):
    """Per-point flops of an optimized cluster; every temp is counted once."""
    return (sum(count_ops(v) for _, v in oc.hoisted)
            + sum(count_ops(v) for _, v in oc.local_temps)
            + sum(count_ops(v) for _, v in oc.exprs))


# ---------------------------------------------------------------------------
# factorization

def _factor_list(e):
    return list(e.args) if e.is_Mul else [e]


def _common_factors(terms):
    common = Counter(_factor_list(terms[0]))
    for t in terms[1:]:
        common &= Counter(_factor_list(t))
    return common


def _strip(term, common):
    left = Counter(common)
    out = []
    for f in _factor_list(term):
        if left[f] > 0:
            left[f] -= 1
        else:
            out.append(f)
    return mul(*out)


def factorize(e):
    """Group sum terms sharing a numeric coefficient ``c`` (``|c| != 1``).

    ``c*A*u1 + c*A*u2`` becomes ``c*A*(u1 + u2)``: within each group the
    factors common to all members are pulled out as well.
    """
    if e.is_Atom:
        return e
    args = [factorize(a) for a in e.args]
    if e.is_Mul:
        return mul(*args)
    if e.is_Pow:
        return e.func(*args)
    if not e.is_Add:
        return e.func(*args)
    groups = {}
    order = []
    for t in args:
        c, rest = as_coeff_term(t)
        key = c if abs(c) != 1 and not rest.is_Number else ("single", len(order))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append((c, rest, t))
    out = []
    for key in order:
        members = groups[key]
        if len(members) == 1:
            out.append(members[0][2])
            continue
        rests = [r for _, r, _ in members]
        common = _common_factors(rests)
        inner = add(*[_strip(r, common) for r in rests])
        out.append(mul(key, *common.elements(), inner))
    return add(*out)


# ---------------------------------------------------------------------------
# CSE

class _Namer:
    def __init__(self, prefix="_t"):
        self.prefix = prefix
        self.n = 0

    def __call__(self):
        s = Temp(f"{self.prefix}{self.n}")
        self.n += 1
        return s


def cse(exprs, namer=None):
    """Bind every compound subexpression occurring twice or more to a temp.

    Returns ``(temps, new_exprs)`` where ``temps`` is an ordered list of
    ``(Temp, definition)``; definitions may reference earlier temps.
    """
    namer = namer or _Namer()
    counts = Counter()
    for e in exprs:
        for n in preorder(e):
            if not n.is_Atom and count_ops(n) > 0:
                counts[n] += 1
    repeated = {n for n, c in counts.items() if c >= 2}
    bound = {}
    temps = []

    def rebuild(n):
        if n.is_Atom:
            return n
        if n in bound:
            return bound[n]
        new = n.func(*[rebuild(a) for a in n.args])
        if n in repeated:
            s = namer()
            bound[n] = s
            temps.append((s, new))
            return s
        return new

    out = [rebuild(e) for e in exprs]
    return _inline_single_use(temps, out)


def _inline_single_use(temps, exprs):
    while True:
        uses = Counter()
        for e in [v for _, v in temps] + list(exprs):
            for n in preorder(e):
                if isinstance(n, Temp):
                    uses[n] += 1
        once = [(s, v) for s, v in temps if uses[s] <= 1]
        if not once:
            return temps, exprs
        s, v = once[-1]
        temps = [(k, subs(d, {s: v}, canonical=False)) for k, d in temps if k != s]
        exprs = [subs(e, {s: v}, canonical=False) for e in exprs]


def inline_temps(e, temps):
    """Substitute temp definitions back into ``e`` (latest first)."""
    for s, v in reversed(list(temps)):
        e = subs(e, {s: v}, canonical=False)
    return e


# ---------------------------------------------------------------------------
# hoisting

def _deps(e, dims, known):
    out = set()
    for n in preorder(e):
        if isinstance(n, Indexed):
            out.update(n.function.grid.dimensions)
        elif isinstance(n, Dimension):
            out.add(n)
        elif isinstance(n, Temp):
            out.update(known.get(n, set(dims)))
    return frozenset(out) & frozenset(dims)


def _hoist(temps, exprs, dims, namer):
    full = frozenset(dims)
    hoisted, levels, local = [], {}, []
    seen = {}

    def bind(e, deps):
        s = seen.get(e)
        if s is None:
            s = namer()
            seen[e] = s
            hoisted.append((s, e))
            levels[s] = deps
        return s

    def walk(n):
        if n.is_Atom:
            return n
        deps = _deps(n, dims, levels)
        if deps < full and count_ops(n) > 0:
            return bind(n, deps)
        if not (n.is_Add or n.is_Mul):
            return n.func(*[walk(a) for a in n.args])
        # bind loop-invariant operands of a sum/product together
        deps = [_deps(a, dims, levels) for a in n.args]
        groups = {}
        for a, d in zip(n.args, deps):
            if d < full:
                groups.setdefault(d, []).append(a)
        args, emitted = [], set()
        for a, d in zip(n.args, deps):
            if d < full and len(groups[d]) > 1:
                if d not in emitted:
                    emitted.add(d)
                    args.append(bind(n.func(*groups[d]), d))
            else:
                args.append(walk(a))
        return args[0] if len(args) == 1 else n.func(*args)

    for s, v in temps:
        d = _deps(v, dims, levels)
        if d < full:
            hoisted.append((s, v))
            levels[s] = d
        else:
            local.append((s, walk(v)))
    exprs = [walk(e) for e in exprs]
    return hoisted, levels, local, exprs


def _rename(hoisted, local, exprs, levels, dims):
    order = {d: i for i, d in enumerate(dims)}

    def depth(s):
        return max((order[d] + 1 for d in levels[s]), default=0)

    hoisted = sorted(hoisted, key=lambda sv: depth(sv[0]))  # stable
    mapping = {}
    for i, (s, _) in enumerate(hoisted + local):
        mapping[s] = Temp(f"r{i}")

    def ren(e):
        return subs(e, mapping, canonical=False)

    hoisted = tuple((mapping[s], ren(v)) for s, v in hoisted)
    local = tuple((mapping[s], ren(v)) for s, v in local)
    levels = {mapping[s]: d for s, d in levels.items()}
    return hoisted, local, tuple(ren(e) for e in exprs), levels


def optimize(cluster, level=DseLevel.basic):
    level = DseLevel(level)
    targets = [t for t, _ in cluster.exprs]
    updates = [u for _, u in cluster.exprs]
    if level is DseLevel.basic:
        oc = OptimizedCluster(cluster, tuple(cluster.exprs))
        return _with_count(oc)
    namer = _Namer()
    updates = [factorize(u) for u in updates]
    temps, updates = cse(updates, namer)
    if cluster.is_point:
        hoisted, levels, local = [], {}, temps
    else:
        hoisted, levels, local, updates = _hoist(temps, updates, cluster.dimensions, namer)
    hoisted, local, updates, levels = _rename(hoisted, local, updates, levels,
                                              cluster.dimensions)
    oc = OptimizedCluster(cluster, tuple(zip(targets, updates)), hoisted, local,
                          levels=levels)
    return _with_count(oc)


def _with_count(oc):
    return OptimizedCluster(oc.cluster, oc.exprs, oc.hoisted, oc.local_temps, flop_count(oc),
                            oc.levels)

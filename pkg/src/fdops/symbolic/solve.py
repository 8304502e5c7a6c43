from .expr import ONE, ZERO, Indexed, Symbol, add, expand, mul, power, preorder
from .fd import expand_fd

__all__ = ["SolveError", "collect_linear", "solve_forward"]


class SolveError(ValueError):
    pass


def collect_linear(e, x):
    """Write ``e`` as ``a*x + b`` with ``a``, ``b`` free of ``x``.

    Raises :class:`SolveError` if ``e`` is not affine in ``x``.
    """
    if e == x:
        return ONE, ZERO
    if e.is_Atom or not e.has(x):
        return ZERO, e
    if e.is_Add:
        parts = [collect_linear(t, x) for t in e.args]
        return add(*[p[0] for p in parts]), add(*[p[1] for p in parts])
    if e.is_Mul:
        dep = [f for f in e.args if f.has(x)]
        if len(dep) > 1:
            raise SolveError(f"equation is nonlinear in {x}")
        rest = mul(*[f for f in e.args if f is not dep[0]])
        a, b = collect_linear(dep[0], x)
        return mul(rest, a), mul(rest, b)
    if e.is_Pow:
        raise SolveError(f"equation is nonlinear in {x}")
    raise SolveError(f"cannot isolate {x} inside {type(e).__name__}")


def _clear_symbol_denominators(a, b):
    # scale by the symbols (dt, h_x, ...) appearing with negative powers in a
    terms = a.args if a.is_Add else (a,)
    lowest = {}
    for t in terms:
        for f in (t.args if t.is_Mul else (t,)):
            base, exp = (f.base, f.exp) if f.is_Pow else (f, 1)
            if isinstance(base, Symbol):
                lowest[base] = min(lowest.get(base, 0), exp)
    scale = mul(*[power(s, -k) for s, k in sorted(lowest.items(), key=lambda kv: kv[0].name)
                  if k < 0])
    return expand(mul(scale, a)), expand(mul(scale, b))


def solve_forward(eq, target):
    """Closed-form update for ``target[t+1]`` from ``eq`` (``lhs - rhs = 0``).

    The residual must be affine in the single access ``target[t+1]`` at zero
    space offset.  The result is expanded into a sum of terms, each divided
    by the common coefficient of the unknown.
    """
    x = target.forward
    residual = expand_fd(eq.lhs - eq.rhs)
    forward = {i for i in preorder(residual)
               if isinstance(i, Indexed) and i.function == target and i.time_offset >= 1}
    if forward - {x}:
        others = ", ".join(sorted(str(i) for i in forward - {x}))
        raise SolveError(f"cannot solve for {x}: other forward accesses present ({others})")
    a, b = collect_linear(residual, x)
    if a == ZERO:
        raise SolveError(f"{x} does not appear in the equation")
    a, b = _clear_symbol_denominators(a, b)
    inv = power(a, -1)
    nb = expand(mul(-1, b))
    return add(*[mul(t, inv) for t in (nb.args if nb.is_Add else (nb,))])

"""Finite-difference weights and derivative expansion."""
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .expr import Derivative, Number, add, mul, power, preorder

__all__ = ["fd_coefficients", "derivative", "dt", "dt2", "laplace", "expand_fd",
           "FDOrderError", "TIME_ACCURACY"]

# time derivatives always use the 3-point centred stencils
TIME_ACCURACY = 2


class FDOrderError(ValueError):
    """A derivative asks for more accuracy than its function's halo supports."""


def _solve_exact(a, b):
    """Gauss-Jordan elimination over the rationals."""
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [vr - f * vc for vr, vc in zip(m[r], m[col])]
    return [row[-1] for row in m]


@lru_cache(maxsize=None)
def _weights(derivative_order, accuracy_order):
    radius = accuracy_order // 2
    offsets = range(-radius, radius + 1)
    # Taylor table: sum_j c_j * j**k / k! = delta(k, d) for k = 0..2r
    rows = [[Fraction(j ** k, factorial(k)) for j in offsets] for k in range(2 * radius + 1)]
    rhs = [Fraction(int(k == derivative_order)) for k in range(2 * radius + 1)]
    return tuple(zip(offsets, _solve_exact(rows, rhs)))


def fd_coefficients(derivative_order, accuracy_order):
    """Central stencil weights as ``[(offset, Fraction), ...]``.

    Weights exclude the ``1/h**derivative_order`` factor.  The stencil has
    ``accuracy_order + 1`` points centred on zero.

    >>> fd_coefficients(2, 2)
    [(-1, Fraction(1, 1)), (0, Fraction(-2, 1)), (1, Fraction(1, 1))]
    """
    if derivative_order not in (1, 2):
        raise ValueError(f"derivative order {derivative_order} unsupported (only 1 and 2)")
    if accuracy_order < 2 or accuracy_order % 2:
        raise ValueError(f"accuracy order must be even and >= 2, got {accuracy_order}")
    return list(_weights(derivative_order, accuracy_order))


def derivative(u, dim, order, accuracy=None):
    if dim.is_Time:
        if not u.is_time_function:
            raise ValueError(f"{u.name} is time-invariant; it has no time derivative")
        accuracy = TIME_ACCURACY if accuracy is None else accuracy
    elif accuracy is None:
        accuracy = u.space_order
    return Derivative(u, dim, order, accuracy)


def dt(u):
    """First time derivative (centred, 2nd order)."""
    return derivative(u, u.grid.time_dim, 1)


def dt2(u):
    if not u.is_time_function:
        raise ValueError(f"{u.name} is time-invariant; it has no time derivative")
    if u.time_order < 2:
        raise ValueError(f"{u.name}: dt2 needs time_order >= 2, got {u.time_order}")
    return derivative(u, u.grid.time_dim, 2)


def laplace(u):
    return add(*[derivative(u, d, 2) for d in u.grid.dimensions])


def _expand_derivative(d):
    f, dim = d.function, d.dimension
    if dim.is_Time:
        if f.time_order < TIME_ACCURACY:
            raise FDOrderError(
                f"{f.name}: time_order {f.time_order} too low for a centred "
                f"derivative along {dim.name}")
    elif d.accuracy > f.space_order:
        raise FDOrderError(
            f"{f.name}: accuracy {d.accuracy} along {dim.name} exceeds space_order "
            f"{f.space_order} (halo {f.halo})")
    centre = f.indexed()
    terms = [mul(Number(c), centre.shifted(dim, o))
             for o, c in fd_coefficients(d.order, d.accuracy) if c != 0]
    return mul(add(*terms), power(dim.spacing, -d.order))


def expand_fd(e):
    """Replace every :class:`Derivative` with its finite-difference stencil."""
    if e.is_Derivative:
        return _expand_derivative(e)
    if e.is_Atom or not any(n.is_Derivative for n in preorder(e)):
        return e
    args = [expand_fd(a) for a in e.args]
    if e.is_Add:
        return add(*args)
    if e.is_Mul:
        return mul(*args)
    if e.is_Pow:
        return power(args[0], e.exp)
    return e.func(*args)


from fractions import Fraction
from math import factorial

import mpmath
import numpy as np
import pytest
import sympy

from fdops.executor import evaluate
from fdops.symbolic import (Derivative, FDOrderError, Grid, GridFunction, Number, derivative,
                            dt2, expand_fd, fd_coefficients, laplace)
from fdops.symbolic.expr import Indexed, preorder

ORDERS = [2, 4, 8, 12, 16, 24]


def _sympy_weights(d, p):
    r = p // 2
    pts = list(range(-r, r + 1))
    w = sympy.finite_diff_weights(d, pts, 0)[d][-1]
    return [(o, Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])))
            for o, c in zip(pts, w)]


@pytest.mark.parametrize("p", ORDERS)
@pytest.mark.parametrize("d", [1, 2])
def test_coefficients_match_sympy(d, p):
    assert fd_coefficients(d, p) == _sympy_weights(d, p)


@pytest.mark.parametrize("p", ORDERS)
@pytest.mark.parametrize("d", [1, 2])
def test_taylor_exactness(d, p):
    """Exact on monomials up to degree p + d - 1, and not beyond (order exactly p)."""
    w = fd_coefficients(d, p)
    assert len(w) == p + 1
    for k in range(p + d):
        moment = sum(c * Fraction(o) ** k for o, c in w)
        assert moment == (factorial(d) if k == d else 0), k
    assert sum(c * Fraction(o) ** (p + d) for o, c in w) != 0


@pytest.mark.parametrize("d, p, expected", [
    (2, 2, [(-1, 1), (0, -2), (1, 1)]),
    (1, 2, [(-1, Fraction(-1, 2)), (0, 0), (1, Fraction(1, 2))]),
    (2, 4, [(-2, Fraction(-1, 12)), (-1, Fraction(4, 3)), (0, Fraction(-5, 2)),
            (1, Fraction(4, 3)), (2, Fraction(-1, 12))]),
])
def test_known_stencils(d, p, expected):
    assert fd_coefficients(d, p) == expected


@pytest.mark.parametrize("d, p", [(3, 2), (0, 2), (2, 3), (2, 0), (1, -2)])
def test_invalid_orders(d, p):
    with pytest.raises(ValueError):
        fd_coefficients(d, p)


@pytest.mark.parametrize("p", [2, 4, 8])
def test_second_derivative_convergence(p):
    """Halving h shrinks the error by at least 0.9 * 2**p."""
    mpmath.mp.dps = 60
    f, x0 = mpmath.sin, mpmath.mpf("0.3")
    exact = -mpmath.sin(x0)
    w = [(o, mpmath.mpf(c.numerator) / c.denominator) for o, c in fd_coefficients(2, p)]

    def err(h):
        return abs(sum(c * f(x0 + o * h) for o, c in w) / h ** 2 - exact)

    for h in (mpmath.mpf("0.2"), mpmath.mpf("0.1")):
        assert err(h) / err(h / 2) >= 0.9 * 2 ** p


# -- derivative operators ------------------------------------------------------

def _grid_eval(e, values, point):
    """Evaluate an FD-expanded expression at integer grid ``point``."""
    def look(leaf):
        if isinstance(leaf, Indexed):
            idx = tuple(p + o for p, o in zip(point, leaf.offsets))
            return values[leaf.function.name](leaf.time_offset, idx)
        return {"dt": 1.0, "h_x": 1.0, "h_y": 1.0, "h_z": 1.0}[leaf.name]
    return evaluate(e, look, np.float64)


def test_dt2_is_a_derivative_node():
    g = Grid((6,))
    u = GridFunction("u", g, time_order=2)
    assert dt2(u) == Derivative(u, g.time_dim, 2, 2)
    assert u.dt2 == dt2(u)


def test_dt2_of_constant_in_time_vanishes():
    g = Grid((6,))
    u = GridFunction("u", g, time_order=2)
    e = expand_fd(dt2(u))
    vals = {"u": lambda t, idx: 3.0 + idx[0]}
    assert _grid_eval(e, vals, (2,)) == 0.0


def test_dt2_of_t_squared_is_two():
    g = Grid((6,))
    u = GridFunction("u", g, time_order=2)
    e = expand_fd(dt2(u))
    for t0 in range(5):
        vals = {"u": lambda t, idx, t0=t0: float((t0 + t) ** 2)}
        assert _grid_eval(e, vals, (3,)) == 2.0


def test_dt2_needs_time_function():
    g = Grid((6,))
    m = GridFunction("m", g)
    with pytest.raises(ValueError):
        dt2(m)
    with pytest.raises(ValueError):
        dt2(GridFunction("v", g, time_order=1))


def test_laplace_structure_and_access_count():
    g = Grid((8, 8, 8))
    u = GridFunction("u", g, time_order=2)
    lap = laplace(u)
    assert lap.is_Add and len(lap.args) == 3
    assert all(isinstance(t, Derivative) and t.order == 2 for t in lap.args)
    accesses = {n for n in preorder(expand_fd(lap)) if isinstance(n, Indexed)}
    assert len(accesses) == 7


@pytest.mark.parametrize("so", [2, 4, 8])
def test_laplace_of_x_squared_is_two(so):
    g = Grid((20,))
    u = GridFunction("u", g, space_order=so, time_order=2)
    e = expand_fd(laplace(u))
    vals = {"u": lambda t, idx: float(idx[0] ** 2)}
    for x in range(so // 2, 20 - so // 2):
        assert _grid_eval(e, vals, (x,)) == pytest.approx(2.0, abs=1e-9)


def test_laplace_of_constant_is_zero():
    g = Grid((10, 10))
    u = GridFunction("u", g, space_order=4, time_order=2)
    e = expand_fd(laplace(u))
    assert _grid_eval(e, {"u": lambda t, idx: 7.5}, (5, 5)) == pytest.approx(0.0, abs=1e-12)


def test_expand_fd_second_derivative_form():
    g = Grid((10,))
    u = GridFunction("u", g, time_order=2)
    x = g.dimensions[0]
    e = expand_fd(derivative(u, x, 2))
    c = u.indexed()
    expected = (c.shifted(x, -1) - 2 * c + c.shifted(x, 1)) * x.spacing ** -2
    assert e == expected


def test_expand_fd_passthrough_and_idempotence():
    assert expand_fd(Number(3)) == Number(3)
    g = Grid((10, 10))
    u = GridFunction("u", g, space_order=4, time_order=2)
    once = expand_fd(u.laplace)
    assert expand_fd(once) == once


@pytest.mark.parametrize("so", [2, 4, 8])
def test_wave_residual_access_counts(so):
    g = Grid((24, 24, 24))
    u = GridFunction("u", g, space_order=so, time_order=2)
    m = GridFunction("m", g, space_order=so)
    e = expand_fd(m * u.dt2 - u.laplace)
    accs = {n for n in preorder(e) if isinstance(n, Indexed) and n.function == u}
    assert {a.time_offset for a in accs} == {-1, 0, 1}
    space = {a for a in accs if a.time_offset == 0}
    assert len(space) == 2 * so // 2 * 3 + 1


def test_accuracy_beyond_halo_is_rejected():
    g = Grid((10,))
    u = GridFunction("u", g, space_order=2, time_order=2)
    with pytest.raises(FDOrderError):
        expand_fd(derivative(u, g.dimensions[0], 2, accuracy=4))

"""Immutable expression trees.

Nodes are hash-consed by value: two trees with the same structure compare and
hash equal, which is what the CSE and factorization passes rely on.  The
module-level constructors :func:`add`, :func:`mul` and :func:`power` return
canonical forms (flattened, constants folded, like terms collected, children
sorted); calling a node class directly builds it verbatim.
"""
from fractions import Fraction
from numbers import Rational

__all__ = [
    "Expr", "Number", "Symbol", "Dimension", "TimeSeries", "Add", "Mul", "Pow",
    "Indexed", "Derivative", "sympify", "add", "mul", "power", "split_add", "split_mul",
    "preorder", "postorder", "subs", "expand", "as_coeff_term", "ZERO", "ONE",
]


class Expr:
    __slots__ = ("_args", "_hash", "_key")

    is_Number = False
    is_Symbol = False
    is_Indexed = False
    is_Add = False
    is_Mul = False
    is_Pow = False
    is_Derivative = False

    _rank = 99

    def __init__(self, *args):
        self._args = tuple(args)
        self._hash = hash((type(self).__name__,) + self._content())
        self._key = None

    def _content(self):
        return self._args

    @property
    def args(self):
        return self._args

    @property
    def is_Atom(self):
        return not self._args

    def func(self, *args):
        """Rebuild a node of the same kind from new children, verbatim."""
        return type(self)(*args)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._content() == other._content()

    def __ne__(self, other):
        return not self == other

    def sort_key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def _make_key(self):
        return (self._rank, str(self), 1)

    # arithmetic builds canonical forms
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return mul(-1, self)

    def __pow__(self, n):
        return power(self, n)

    def __repr__(self):
        return str(self)

    def atoms(self, kind):
        return {e for e in preorder(self) if isinstance(e, kind)}

    def has(self, target):
        return any(e == target for e in preorder(self))


class Number(Expr):
    __slots__ = ("value",)
    is_Number = True
    _rank = 0

    def __init__(self, value):
        if isinstance(value, float):
            value = Fraction(value)
        elif not isinstance(value, Rational):
            raise TypeError(f"Number needs a rational value, got {value!r}")
        self.value = Fraction(value)
        super().__init__()

    def _content(self):
        return (self.value,)

    def func(self, *args):
        return self

    def __str__(self):
        return str(self.value)

    def _make_key(self):
        return (0, "", 1)


ZERO = Number(0)
ONE = Number(1)


class Symbol(Expr):
    __slots__ = ("name",)
    is_Symbol = True
    _rank = 1

    def __init__(self, name):
        self.name = name
        super().__init__()

    def _content(self):
        return (self.name,)

    def func(self, *args):
        return self

    def __str__(self):
        return self.name


class Dimension(Symbol):
    """A loop index. ``kind`` is ``"space"`` or ``"time"``."""

    __slots__ = ("kind", "spacing")

    def __init__(self, name, kind="space", spacing=None):
        if kind not in ("space", "time"):
            raise ValueError(f"unknown dimension kind {kind!r}")
        self.kind = kind
        if spacing is None:
            spacing = Symbol("dt" if kind == "time" else f"h_{name}")
        self.spacing = spacing
        super().__init__(name)

    def _content(self):
        return (self.name, self.kind)

    @property
    def is_Time(self):
        return self.kind == "time"


class TimeSeries(Symbol):
    """Scalar whose value is looked up per time step (e.g. a source wavelet)."""


class Add(Expr):
    __slots__ = ()
    is_Add = True
    _rank = 5

    def __str__(self):
        out = str(self._args[0])
        for a in self._args[1:]:
            s = str(a)
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out


class Mul(Expr):
    __slots__ = ()
    is_Mul = True
    _rank = 4

    def __str__(self):
        parts = []
        for a in self._args:
            s = str(a)
            parts.append(f"({s})" if a.is_Add else s)
        if parts[0] == "-1" and len(parts) > 1:
            return "-" + "*".join(parts[1:])
        return "*".join(parts)

    def _make_key(self):
        coeff, rest = as_coeff_term(self)
        rest_s = "*".join(str(a) for a in rest.args) if rest.is_Mul else str(rest)
        return (self._rank, rest_s + "#" + str(coeff), 1)


class Pow(Expr):
    __slots__ = ()
    is_Pow = True
    _rank = 3

    def __init__(self, base, exp):
        if not isinstance(exp, int):
            raise TypeError("only integer exponents are supported")
        super().__init__(base, exp)

    @property
    def base(self):
        return self._args[0]

    @property
    def exp(self):
        return self._args[1]

    @property
    def args(self):
        return (self._args[0],)

    def func(self, *args):
        return Pow(args[0], self.exp)

    def __str__(self):
        b = str(self.base)
        if not (self.base.is_Symbol or self.base.is_Indexed or self.base.is_Number):
            b = f"({b})"
        return f"{b}**{self.exp}"

    def _make_key(self):
        r, s, _ = self.base.sort_key()
        return (r, s, self.exp)


class Indexed(Expr):
    """Access ``function[t + time_offset, x + offsets[0], ...]``.

    ``time_offset`` is ``None`` for time-invariant functions.
    """

    __slots__ = ("function", "time_offset", "offsets")
    is_Indexed = True
    _rank = 2

    def __init__(self, function, time_offset, offsets):
        self.function = function
        self.time_offset = time_offset
        self.offsets = tuple(int(o) for o in offsets)
        if len(self.offsets) != function.grid.ndim:
            raise ValueError(
                f"{function.name}: expected {function.grid.ndim} offsets, got {len(self.offsets)}")
        if (time_offset is None) != (function.time_order is None):
            raise ValueError(f"{function.name}: time offset does not match time_order")
        super().__init__()

    def _content(self):
        return (self.function, self.time_offset, self.offsets)

    def func(self, *args):
        return self

    def shifted(self, dim, amount):
        if dim.is_Time:
            return Indexed(self.function, self.time_offset + amount, self.offsets)
        i = self.function.grid.dimensions.index(dim)
        offs = list(self.offsets)
        offs[i] += amount
        return Indexed(self.function, self.time_offset, offs)

    def __str__(self):
        idx = []
        if self.time_offset is not None:
            idx.append(_shift_str("t", self.time_offset))
        for d, o in zip(self.function.grid.dimensions, self.offsets):
            idx.append(_shift_str(d.name, o))
        return f"{self.function.name}[{', '.join(idx)}]"

    def _make_key(self):
        tv = 0 if self.time_offset is not None else 1
        t = -(self.time_offset or 0)
        return (self._rank, f"{tv}{self.function.name}:{t:+04d}:{self.offsets}", 1)


class Derivative(Expr):
    """Unexpanded derivative of a grid function along one dimension."""

    __slots__ = ("function", "dimension", "order", "accuracy")
    is_Derivative = True
    _rank = 6

    def __init__(self, function, dimension, order, accuracy):
        self.function = function
        self.dimension = dimension
        self.order = order
        self.accuracy = accuracy
        super().__init__()

    def _content(self):
        return (self.function, self.dimension, self.order, self.accuracy)

    def func(self, *args):
        return self

    def __str__(self):
        return f"Derivative({self.function.name}, {self.dimension.name}, {self.order})"


def _shift_str(name, o):
    if o == 0:
        return name
    return f"{name} + {o}" if o > 0 else f"{name} - {-o}"


def sympify(obj):
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (Rational, float)) and not isinstance(obj, bool):
        return Number(obj)
    as_expr = getattr(obj, "_as_expr", None)
    if as_expr is not None:
        return as_expr()
    raise TypeError(f"cannot convert {obj!r} to an expression")


# ---------------------------------------------------------------------------
# canonical constructors

def as_coeff_term(e):
    """Split ``e`` into ``(Fraction coefficient, remaining term)``."""
    if e.is_Number:
        return e.value, ONE
    if e.is_Mul and e.args[0].is_Number:
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(*rest)
    return Fraction(1), e


def add(*terms):
    flat = []
    for t in map(sympify, terms):
        if t.is_Add:
            flat.extend(t.args)
        else:
            flat.append(t)
    const = Fraction(0)
    coeffs = {}
    for t in flat:
        if t.is_Number:
            const += t.value
            continue
        c, rest = as_coeff_term(t)
        coeffs[rest] = coeffs.get(rest, 0) + c
    out = []
    for rest, c in coeffs.items():
        if c == 0:
            continue
        out.append(rest if c == 1 else _scale(c, rest))
    out.sort(key=Expr.sort_key)
    if const != 0:
        out.append(Number(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(*out)


def _scale(c, term):
    if term.is_Mul:
        return Mul(Number(c), *term.args)
    return Mul(Number(c), term)


def mul(*factors):
    coeff = Fraction(1)
    powers = {}
    stack = list(map(sympify, factors))
    stack.reverse()
    while stack:
        f = stack.pop()
        if f.is_Mul:
            stack.extend(reversed(f.args))
        elif f.is_Number:
            coeff *= f.value
        elif f.is_Pow:
            powers[f.base] = powers.get(f.base, 0) + f.exp
        else:
            powers[f] = powers.get(f, 0) + 1
    if coeff == 0:
        return ZERO
    out = []
    for base, exp in powers.items():
        if exp == 0:
            continue
        p = power(base, exp)
        if p.is_Number:
            coeff *= p.value
        elif p.is_Mul:
            # power() distributes over products it cannot keep atomic
            c, rest = as_coeff_term(p)
            coeff *= c
            out.extend(rest.args if rest.is_Mul else (rest,))
        else:
            out.append(p)
    out.sort(key=Expr.sort_key)
    if coeff != 1:
        out.insert(0, Number(coeff))
    if not out:
        return Number(coeff)
    if len(out) == 1:
        return out[0]
    return Mul(*out)


def power(base, exp):
    base = sympify(base)
    if not isinstance(exp, int):
        raise TypeError("only integer exponents are supported")
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if base.is_Number:
        if base.value == 0 and exp < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Number(base.value ** exp)
    if base.is_Pow:
        return power(base.base, base.exp * exp)
    if base.is_Mul:
        return mul(*[power(f, exp) for f in base.args])
    return Pow(base, exp)


# ---------------------------------------------------------------------------
# traversal and rewriting

def preorder(e):
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.args))


def postorder(e):
    for a in e.args:
        yield from postorder(a)
    yield e


def _canonical_rebuild(e, args):
    if e.is_Add:
        return add(*args)
    if e.is_Mul:
        return mul(*args)
    if e.is_Pow:
        return power(args[0], e.exp)
    return e.func(*args)


def subs(e, mapping, canonical=True):
    """Replace any subtree found in ``mapping``."""
    hit = mapping.get(e)
    if hit is not None:
        return hit
    if e.is_Atom:
        return e
    args = [subs(a, mapping, canonical) for a in e.args]
    if all(a is b for a, b in zip(args, e.args)):
        return e
    return _canonical_rebuild(e, args) if canonical else e.func(*args)


def expand(e):
    """Distribute products over sums; negative powers of sums stay atomic."""
    if e.is_Atom:
        return e
    if e.is_Add:
        return add(*[expand(a) for a in e.args])
    if e.is_Pow:
        b = expand(e.base)
        if b.is_Add and e.exp > 0:
            terms = [ONE]
            for _ in range(e.exp):
                terms = [mul(t, p) for t in terms for p in b.args]
            return add(*terms)
        return power(b, e.exp)
    if e.is_Mul:
        terms = [ONE]
        for f in e.args:
            f = expand(f)
            parts = f.args if f.is_Add else (f,)
            terms = [mul(t, p) for t in terms for p in parts]
        return add(*terms)
    return e


def split_add(e):
    """Terms of a sum in evaluation order: numeric literals last.

    Shared by the printers and the executor so both associate the same way.
    """
    terms = e.args if e.is_Add else (e,)
    return [t for t in terms if not t.is_Number] + [t for t in terms if t.is_Number]


def split_mul(e):
    """Return ``(coeff, numerator factors, denominator factors)`` of a product.

    Denominator factors are returned with positive exponents.  This is the
    single evaluation order shared by the printer and the executor.
    """
    coeff = Fraction(1)
    num, den = [], []
    for f in (e.args if e.is_Mul else (e,)):
        if f.is_Number:
            coeff *= f.value
        elif f.is_Pow and f.exp < 0:
            den.append(power(f.base, -f.exp) if f.exp != -1 else f.base)
        else:
            num.append(f)
    return coeff, num, den

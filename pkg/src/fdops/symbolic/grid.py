from .expr import Derivative, Dimension, Indexed, sympify

__all__ = ["Grid", "GridFunction", "Equation"]

_SPACE_NAMES = ("x", "y", "z")


class Grid:
    """Structured grid with uniform spacing per dimension (anisotropic allowed)."""

    def __init__(self, shape, spacing=None):
        shape = tuple(int(n) for n in shape)
        if not 1 <= len(shape) <= 3:
            raise ValueError("grids have 1 to 3 space dimensions")
        if any(n < 1 for n in shape):
            raise ValueError(f"grid shape must be positive, got {shape}")
        if spacing is None:
            spacing = (1.0,) * len(shape)
        spacing = tuple(float(h) for h in spacing)
        if len(spacing) != len(shape):
            raise ValueError("one spacing per space dimension is required")
        if any(h <= 0 for h in spacing):
            raise ValueError(f"grid spacing must be positive, got {spacing}")
        self.shape = shape
        self.spacing = spacing
        self.dimensions = tuple(Dimension(n) for n in _SPACE_NAMES[:len(shape)])
        self.time_dim = Dimension("t", kind="time")

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def spacing_map(self):
        """Spacing symbol name -> numeric value."""
        return {d.spacing.name: h for d, h in zip(self.dimensions, self.spacing)}

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.shape == other.shape
                and self.spacing == other.spacing)

    def __hash__(self):
        return hash((self.shape, self.spacing))

    def __repr__(self):
        return f"Grid(shape={self.shape}, spacing={self.spacing})"


class GridFunction:
    """A named field on a :class:`Grid`.

    ``time_order=None`` makes a time-invariant field (e.g. ``m``, ``damp``);
    otherwise the field keeps ``time_order + 1`` rotating time levels.
    """

    def __init__(self, name, grid, space_order=2, time_order=None):
        if not name.isidentifier():
            raise ValueError(f"invalid function name {name!r}")
        if space_order < 2 or space_order % 2:
            raise ValueError(f"{name}: space_order must be even and >= 2, got {space_order}")
        if time_order is not None and time_order < 1:
            raise ValueError(f"{name}: time_order must be positive")
        self.name = name
        self.grid = grid
        self.space_order = int(space_order)
        self.time_order = None if time_order is None else int(time_order)

    @property
    def halo(self):
        return self.space_order // 2

    @property
    def is_time_function(self):
        return self.time_order is not None

    @property
    def levels(self):
        return self.time_order + 1 if self.is_time_function else 1

    def _key(self):
        return (self.name, self.grid, self.space_order, self.time_order)

    def __eq__(self, other):
        return isinstance(other, GridFunction) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"GridFunction({self.name!r}, so={self.space_order}, to={self.time_order})"

    def indexed(self, time_offset=0, offsets=None):
        if offsets is None:
            offsets = (0,) * self.grid.ndim
        return Indexed(self, time_offset if self.is_time_function else None, offsets)

    def _as_expr(self):
        return self.indexed()

    @property
    def forward(self):
        return self.indexed(1)

    @property
    def backward(self):
        return self.indexed(-1)

    @property
    def dt(self):
        from .fd import dt
        return dt(self)

    @property
    def dt2(self):
        from .fd import dt2
        return dt2(self)

    @property
    def laplace(self):
        from .fd import laplace
        return laplace(self)

    # arithmetic delegates to the centred access
    def __add__(self, o):
        return self._as_expr() + o

    def __radd__(self, o):
        return o + self._as_expr()

    def __sub__(self, o):
        return self._as_expr() - o

    def __rsub__(self, o):
        return sympify(o) - self._as_expr()

    def __mul__(self, o):
        return self._as_expr() * o

    def __rmul__(self, o):
        return sympify(o) * self._as_expr()

    def __truediv__(self, o):
        return self._as_expr() / o

    def __rtruediv__(self, o):
        return sympify(o) / self._as_expr()

    def __neg__(self):
        return -self._as_expr()


class Equation:
    """``lhs = rhs``.  ``point`` marks an explicit update applied at one grid point."""

    def __init__(self, lhs, rhs=0, point=None):
        self.lhs = sympify(lhs)
        self.rhs = sympify(rhs)
        self.point = None if point is None else tuple(int(p) for p in point)
        grids = {i.function.grid for side in (self.lhs, self.rhs) for i in side.atoms(Indexed)}
        grids |= {d.function.grid for side in (self.lhs, self.rhs)
                  for d in side.atoms(Derivative)}
        if len(grids) > 1:
            raise ValueError("both sides of an equation must live on the same grid")

    def __repr__(self):
        return f"Eq({self.lhs}, {self.rhs})"


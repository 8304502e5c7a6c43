"""Rewrite grid accesses into OPS macro form."""
import enum
from dataclasses import dataclass, field

from ..symbolic.expr import Expr

__all__ = ["AccessMode", "OpsArg", "OpsAccess", "ArgRegistry", "name_time_access",
           "make_ops_ast"]


class AccessMode(str, enum.Enum):
    read = "read"
    write = "write"
    read_write = "read_write"

    @property
    def ops_token(self):
        return {"read": "OPS_READ", "write": "OPS_WRITE", "read_write": "OPS_RW"}[self.value]


def name_time_access(function, time_offset):
    """Dataset name for ``function`` at ``time_offset``: ``ut10``, ``ut00``, ``utm10``.

    Time-invariant functions keep their bare name.
    """
    if not function.is_time_function:
        if time_offset not in (None, 0):
            raise ValueError(f"{function.name} is time-invariant; got time offset {time_offset}")
        return function.name
    if time_offset is None:
        raise ValueError(f"{function.name}: access has no time offset")
    if abs(time_offset) > function.time_order:
        raise ValueError(f"{function.name}: time offset {time_offset} exceeds "
                         f"time_order {function.time_order}")
    if time_offset >= 0:
        return f"{function.name}t{time_offset}0"
    return f"{function.name}tm{-time_offset}0"


@dataclass
class OpsArg:
    """One ``ops_arg_dat`` of a kernel: a function at a fixed time offset."""

    dat_name: str
    base_function: object
    time_offset: int
    acc_index: int
    access_mode: AccessMode = AccessMode.read
    stencil_points: list = field(default_factory=list)

    def add_point(self, offsets):
        if offsets not in self.stencil_points:
            self.stencil_points.append(offsets)


class OpsAccess(Expr):
    """Leaf ``dat[OPS_ACCk(o1,o2,...)]``."""

    __slots__ = ("arg", "offsets")
    _rank = 2

    def __init__(self, arg, offsets):
        self.arg = arg
        self.offsets = tuple(offsets)
        super().__init__()

    def _content(self):
        return (self.arg.dat_name, self.arg.acc_index, self.offsets)

    def func(self, *args):
        return self

    def __str__(self):
        offs = ",".join(str(o) for o in self.offsets)
        return f"{self.arg.dat_name}[OPS_ACC{self.arg.acc_index}({offs})]"


class ArgRegistry:
    """Assigns ``OPS_ACCk`` indices per (function, time offset), first come first served."""

    def __init__(self):
        self._args = {}

    @property
    def args(self):
        return sorted(self._args.values(), key=lambda a: a.acc_index)

    def access(self, indexed, mode=AccessMode.read):
        f, toff = indexed.function, indexed.time_offset
        key = (f, toff)
        arg = self._args.get(key)
        if arg is None:
            arg = OpsArg(name_time_access(f, toff), f, toff, len(self._args), mode)
            self._args[key] = arg
        elif arg.access_mode is not mode:
            arg.access_mode = AccessMode.read_write
        arg.add_point(indexed.offsets)
        return OpsAccess(arg, indexed.offsets)


def make_ops_ast(e, registry):
    """Structural copy of ``e`` with every grid access replaced by its macro form.

    An ``(lhs, rhs)`` pair is an assignment: the store target is registered
    first so it receives ``OPS_ACC0``.
    """
    if isinstance(e, tuple):
        lhs, rhs = e
        target = registry.access(lhs, AccessMode.write)
        return target, make_ops_ast(rhs, registry)
    if e.is_Symbol or e.is_Number:
        return e
    if e.is_Indexed:
        return registry.access(e)
    return e.func(*[make_ops_ast(a, registry) for a in e.args])

"""C expression printer.

Association follows :func:`split_add` / :func:`split_mul` exactly, so the
emitted text computes, operation for operation, what the executor computes.
"""
import numpy as np

from ..symbolic.expr import Dimension, split_add, split_mul

__all__ = ["CPrinter", "literal"]


def literal(value):
    """C literal for a rational: integers verbatim, otherwise float32 with 9 digits."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(np.float32(float(value))):.9g}F"


class CPrinter:
    """Print expressions as C.  Subclasses override :meth:`leaf`."""

    def leaf(self, e):
        if isinstance(e, Dimension):
            return f"(float)({e.name})"
        return getattr(e, "name", None) or str(e)

    def __call__(self, e):
        return self.doprint(e)

    def doprint(self, e):
        if e.is_Number:
            return literal(e.value)
        if e.is_Atom:
            return self.leaf(e)
        if e.is_Add:
            return self._add(e)
        if e.is_Pow:
            p = self._power(e.base, abs(e.exp))
            return f"1/{p}" if e.exp < 0 else p
        if e.is_Mul:
            return self._mul(e)
        raise TypeError(f"cannot print {type(e).__name__}")

    def _power(self, base, n):
        b = self._factor(base)
        return b if n == 1 else "(" + "*".join([b] * n) + ")"

    def _factor(self, e):
        s = self.doprint(e)
        if e.is_Add or e.is_Mul or (e.is_Number and e.value < 0):
            return f"({s})"
        return s

    def _mul(self, e):
        coeff, num, den = split_mul(e)
        parts = ([literal(abs(coeff))] if abs(coeff) != 1 else []) + [self._factor(f) for f in num]
        out = "*".join(parts) if parts else "1"
        if coeff < 0:
            out = "-" + out
        if den:
            d = [self._factor(f) for f in den]
            out += "/" + d[0] if len(d) == 1 else "/(" + "*".join(d) + ")"
        return out

    def _add(self, e):
        out = ""
        for i, t in enumerate(split_add(e)):
            s = f"({self.doprint(t)})" if t.is_Add else self.doprint(t)
            if i == 0:
                out = s
            elif s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out

"""Forward-mode dual scalars for exact first derivatives.

A ``Dual`` carries a value and one directional derivative.  Evaluating a
chart (or a parsed expression) on duals seeded along a coordinate direction
returns the exact derivative in that direction, so first derivatives carry
no truncation error.  Second and higher derivatives are always obtained by
finite differences over first-derivative data.

The module-level math functions accept plain floats or duals, so the same
evaluation code serves both paths.
"""

from __future__ import annotations

import math


class EvalDomainError(ValueError):
    """Raised when a function is evaluated outside its real domain."""


class Dual:
    __slots__ = ("val", "dot")

    def __init__(self, val, dot=0.0):
        self.val = float(val)
        self.dot = float(dot)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.dot!r})"

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        v, d = _parts(other)
        return Dual(self.val + v, self.dot + d)

    __radd__ = __add__

    def __sub__(self, other):
        v, d = _parts(other)
        return Dual(self.val - v, self.dot - d)

    def __rsub__(self, other):
        v, d = _parts(other)
        return Dual(v - self.val, d - self.dot)

    def __mul__(self, other):
        v, d = _parts(other)
        return Dual(self.val * v, self.dot * v + self.val * d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, d = _parts(other)
        return Dual(self.val / v, (self.dot * v - self.val * d) / (v * v))

    def __rtruediv__(self, other):
        v, d = _parts(other)
        return Dual(v / self.val, (d * self.val - v * self.dot) / (self.val * self.val))

    def __neg__(self):
        return Dual(-self.val, -self.dot)

    def __pos__(self):
        return self

    def __pow__(self, other):
        if isinstance(other, Dual):
            return power(self, other)
        if float(other) == int(other):
            n = int(other)
            if n == 0:
                return Dual(1.0, 0.0)
            return Dual(self.val ** n, n * self.val ** (n - 1) * self.dot)
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


def _parts(x):
    if isinstance(x, Dual):
        return x.val, x.dot
    return float(x), 0.0


def value(x):
    """Value part of a float or dual."""
    return x.val if isinstance(x, Dual) else float(x)


def deriv(x):
    """Derivative part of a float or dual (zero for plain floats)."""
    return x.dot if isinstance(x, Dual) else 0.0


# -- elementary functions, float/dual generic ------------------------------

def _lift(x, f, df):
    if isinstance(x, Dual):
        return Dual(f(x.val), df(x.val) * x.dot)
    return f(float(x))


def sin(x):
    return _lift(x, math.sin, math.cos)


def cos(x):
    return _lift(x, math.cos, lambda v: -math.sin(v))


def tan(x):
    return _lift(x, math.tan, lambda v: 1.0 / math.cos(v) ** 2)


def exp(x):
    return _lift(x, math.exp, math.exp)


def log(x):
    if value(x) <= 0.0:
        raise EvalDomainError(f"log of non-positive value {value(x)!r}")
    return _lift(x, math.log, lambda v: 1.0 / v)


def sqrt(x):
    if value(x) < 0.0:
        raise EvalDomainError(f"sqrt of negative value {value(x)!r}")
    if isinstance(x, Dual) and x.val == 0.0:
        raise EvalDomainError("sqrt derivative undefined at 0")
    return _lift(x, math.sqrt, lambda v: 0.5 / math.sqrt(v))


def sinh(x):
    return _lift(x, math.sinh, math.cosh)


def cosh(x):
    return _lift(x, math.cosh, math.sinh)


def atan(x):
    return _lift(x, math.atan, lambda v: 1.0 / (1.0 + v * v))


def power(base, exponent):
    """base ** exponent with non-integer exponents routed through exp/log."""
    ev = value(exponent)
    if not isinstance(exponent, Dual) or exponent.dot == 0.0:
        if ev == int(ev):
            if isinstance(base, Dual):
                return base ** int(ev)
            return float(base) ** int(ev)
    if value(base) <= 0.0:
        raise EvalDomainError(
            f"power with non-integer exponent needs positive base, got {value(base)!r}"
        )
    return exp(_as_scalar(exponent) * log(base))


def _as_scalar(x):
    return x if isinstance(x, Dual) else float(x)

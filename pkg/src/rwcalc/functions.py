"""
Catalog of real functions used as integrands, test functions and weights.

Every entry is vectorised over numpy arrays. The algebraic ones (identity,
square, constants, abs/sign shifts, indicators) also work elementwise on
``dtype=object`` arrays of :class:`fractions.Fraction`, which lets the
discrete identities be checked in exact arithmetic.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

__all__ = ["GridFunction", "catalog", "CATALOG_IDS", "sgn"]


def sgn(x):
    """Sign with ``sgn(0) == 0``, elementwise."""
    x = np.asarray(x)
    return (x > 0).astype(np.int64) - (x < 0).astype(np.int64)


@dataclass(frozen=True)
class GridFunction:
    name: str
    fn: Callable = field(repr=False, compare=False)
    params: tuple = ()

    def __call__(self, x):
        out = self.fn(np.asarray(x) if not np.isscalar(x) else np.asarray([x]))
        if np.isscalar(x) or np.ndim(x) == 0:
            return out.reshape(-1)[0]
        return out

    @property
    def id(self):
        return ":".join([self.name, *map(str, self.params)])


def _num(text):
    text = str(text)
    if "/" in text:
        return Fraction(text)
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def _constant(c):
    return GridFunction("const", lambda x: x * 0 + c, (c,))


def _indicator(a, b=None):
    if b is None:
        return GridFunction("indicator", lambda x: (x >= a).astype(np.int64), (a,))
    return GridFunction("indicator", lambda x: ((x >= a) & (x < b)).astype(np.int64), (a, b))


def _pwlinear(*pairs):
    xs = [float(p[0]) for p in pairs]
    ys = [float(p[1]) for p in pairs]
    if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("pwlinear needs at least two strictly increasing knots")
    return GridFunction("pwlinear", lambda x: np.interp(np.asarray(x, dtype=float), xs, ys),
                        tuple(f"{x}/{y}" for x, y in zip(xs, ys)))


_BUILDERS = {
    "identity": lambda: GridFunction("identity", lambda x: x * 1),
    "square": lambda: GridFunction("square", lambda x: x * x),
    "const": _constant,
    "abs": lambda a=0: GridFunction("abs", lambda x: abs(x - a), (a,)),
    "sign": lambda a=0: GridFunction("sign", lambda x: sgn(x - a), (a,)),
    "sine": lambda freq=1.0: GridFunction("sine", lambda x: np.sin(freq * np.asarray(x, dtype=float)),
                                         (freq,)),
    "exp": lambda rate=1.0: GridFunction("exp", lambda x: np.exp(rate * np.asarray(x, dtype=float)),
                                        (rate,)),
    "indicator": _indicator,
}

CATALOG_IDS = tuple(sorted([*_BUILDERS, "pwlinear"]))


def catalog(spec, *params):
    """Build a catalog function from an id such as ``"abs:0.5"`` or ``("sign", 0)``.

    ``pwlinear`` takes ``x/y`` knot pairs separated by colons, e.g.
    ``"pwlinear:-1/0:0/1:1/0"``.
    """
    name, *rest = str(spec).split(":")
    if name == "pwlinear":
        pairs = [tuple(p.split("/")) for p in rest] + [tuple(p) for p in params]
        return _pwlinear(*pairs)
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog function {name!r}; choose from {CATALOG_IDS}")
    args = [_num(r) for r in rest] + list(params)
    return _BUILDERS[name](*args)

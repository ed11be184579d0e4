"""
Trapezoidal sums and the exact discrete Stratonovich, Ito and Ito-Tanaka
identities for an arbitrary +-1 sequence.

Each ``*_sides`` function returns ``(lhs, rhs)`` and each ``*_residual`` the
difference. With :class:`~fractions.Fraction` inputs and rational-valued
functions the residuals are exactly zero; in floating point the sums are
taken with :func:`math.fsum`.
"""

from fractions import Fraction
import math

import numpy as np

from .errors import OffLattice
from .local_time import crossing_counts

__all__ = [
    "trapezoidal_sum",
    "stratonovich_sides",
    "ito_sides",
    "ito_tanaka_sides",
    "occupation_sides",
    "stratonovich_residual",
    "ito_residual",
    "ito_tanaka_residual",
    "occupation_residual",
]


def _exact(*xs):
    return any(isinstance(x, Fraction) for x in xs)


def _points(a, dx, ints):
    ints = np.asarray(ints, dtype=np.int64)
    if _exact(a, dx):
        return np.array([a + dx * int(i) for i in ints], dtype=object)
    return a + dx * ints.astype(float)


def _sum(values):
    values = np.asarray(values)
    if values.dtype == object:
        return sum(values.tolist(), Fraction(0))
    return math.fsum(values.tolist())


def _trapezoid_int(f, a, dx, k):
    """Trapezoidal sum from ``a`` to ``a + k*dx`` on the lattice ``a + Z dx``."""
    if k == 0:
        return 0 * dx
    s = 1 if k > 0 else -1
    pts = _points(a, dx, s * np.arange(abs(k) + 1))
    vals = f(pts)
    inner = _sum(vals[1:-1]) if abs(k) > 1 else 0
    if _exact(a, dx):
        return s * dx * (Fraction(1, 2) * vals[0] + inner + Fraction(1, 2) * vals[-1])
    return float(s * dx * (0.5 * vals[0] + inner + 0.5 * vals[-1]))


def trapezoidal_sum(f, a, b, dx):
    """Signed trapezoidal sum of ``f`` with step ``dx`` from ``a`` to ``b``."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    ratio = (b - a) / dx
    k = round(ratio)
    if isinstance(ratio, Fraction):
        if ratio != k:
            raise OffLattice(f"{b} is not on the lattice {a} + Z*{dx}")
    elif abs(ratio - k) > 1e-9 * max(1.0, abs(ratio)):
        raise OffLattice(f"{b} is not on the lattice {a} + Z*{dx}")
    return _trapezoid_int(f, a, dx, int(k))


def _walk(a, dx, signs):
    X = np.asarray(signs, dtype=np.int64).reshape(-1)
    if X.size and not np.all(np.abs(X) == 1):
        raise ValueError("signs must be +-1")
    P = np.concatenate(([0], np.cumsum(X)))
    return X, P, _points(a, dx, P)


def stratonovich_sides(f, a, dx, signs):
    X, P, S = _walk(a, dx, signs)
    lhs = _trapezoid_int(f, a, dx, int(P[-1]))
    if X.size == 0:
        return lhs, 0 * dx
    fS = f(S)
    half = Fraction(1, 2) if _exact(a, dx) else 0.5
    rhs = _sum((fS[1:] + fS[:-1]) * half * X * dx)
    return lhs, rhs


def _ito_first(fS, X, dx):
    return _sum(fS[:-1] * X * dx)


def ito_sides(f, a, dx, signs):
    X, P, S = _walk(a, dx, signs)
    lhs = _trapezoid_int(f, a, dx, int(P[-1]))
    if X.size == 0:
        return lhs, 0 * dx
    fS = f(S)
    half = Fraction(1, 2) if _exact(a, dx) else 0.5
    second = _sum((fS[1:] - fS[:-1]) / (X * dx) * (dx * dx))
    return lhs, _ito_first(fS, X, dx) + half * second


def _local_time_terms(f, a, dx, P):
    xi, up, down = crossing_counts(P)
    x = _points(a, dx, xi)
    f_x = f(x)
    f_plus = f(_points(a, dx, xi + 1))
    f_minus = f(_points(a, dx, xi - 1))
    return up * dx, down * dx, f_x, f_plus, f_minus


def ito_tanaka_sides(f, a, dx, signs):
    X, P, S = _walk(a, dx, signs)
    lhs = _trapezoid_int(f, a, dx, int(P[-1]))
    if X.size == 0:
        return lhs, 0 * dx
    fS = f(S)
    Lp, Lm, f_x, f_plus, f_minus = _local_time_terms(f, a, dx, P)
    half = Fraction(1, 2) if _exact(a, dx) else 0.5
    second = _sum(Lp * (f_plus - f_x) + Lm * (f_x - f_minus))
    return lhs, _ito_first(fS, X, dx) + half * second


def occupation_sides(f, a, dx, signs):
    """Both sides of the discrete occupation time formula.

    ``h_{+-dx}(x) = (f(x +- dx) - f(x)) / (+-dx)``;
    ``sum_r h_{X_r dx}(S_{r-1}) dx^2 = sum_x (h_dx L+ + h_-dx L-) dx``.
    """
    X, P, S = _walk(a, dx, signs)
    if X.size == 0:
        return 0 * dx, 0 * dx
    fS = f(S)
    lhs = _sum((fS[1:] - fS[:-1]) / (X * dx) * (dx * dx))
    Lp, Lm, f_x, f_plus, f_minus = _local_time_terms(f, a, dx, P)
    h_up = (f_plus - f_x) / dx
    h_down = (f_minus - f_x) / (-dx)
    rhs = _sum((h_up * Lp + h_down * Lm) * dx)
    return lhs, rhs


def _residual(sides):
    def residual(f, a, dx, signs):
        lhs, rhs = sides(f, a, dx, signs)
        return lhs - rhs
    residual.__name__ = sides.__name__.replace("_sides", "_residual")
    residual.__doc__ = f"``lhs - rhs`` of :func:`{sides.__name__}`."
    return residual


stratonovich_residual = _residual(stratonovich_sides)
ito_residual = _residual(ito_sides)
ito_tanaka_residual = _residual(ito_tanaka_sides)
occupation_residual = _residual(occupation_sides)

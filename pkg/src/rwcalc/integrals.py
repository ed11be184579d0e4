"""
Stochastic sums against Skorohod-embedded walks.

Covers Ito and Stratonovich sums of functions of the path, the right-hand
side of the Ito-Tanaka formula for differences of convex functions, the
Tanaka and occupation-time checks, and sums of truncated predictable
integrands sampled on the Skorohod partition.

Time arguments follow one convention throughout: a real time ``t`` is
floored to the walk grid, ``t_m = floor(t * 4**m) * 4**-m``, and sums run
over steps ``r <= floor(t * 4**m)``.
"""

from dataclasses import dataclass, field, replace
from typing import Callable
import math

import numpy as np

from .coins import derive_seed
from .embedding import embed_nested
from .errors import OffLattice, OutOfHorizon
from .functions import GridFunction, catalog, sgn
from .local_time import discrete_local_time
from .walks import build_nested

__all__ = [
    "ConvexDiffSpec",
    "PredictableSpec",
    "SimpleProcess",
    "KERNELS",
    "steps_at",
    "ito_sum",
    "stratonovich_sum",
    "ito_tanaka_rhs",
    "tanaka_check",
    "occupation_check",
    "simple_process",
    "predictable_sum",
    "isometry_check",
]


def steps_at(walk, t):
    """Number of walk steps ``floor(t * 4**m)`` up to time(s) ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise OutOfHorizon("negative time")
    n = np.floor(t_arr * 4.0 ** walk.level).astype(np.int64)
    if np.any(n > walk.n_steps):
        raise OutOfHorizon(f"t beyond walk horizon {walk.n_steps * 4.0 ** -walk.level}")
    return n


def _cumulative(terms, n):
    # Extended precision keeps 4**12-term prefix sums accurate to ~1e-16.
    cum = np.concatenate(([0.0], np.cumsum(terms, dtype=np.longdouble)))
    out = cum[n].astype(float)
    return float(out) if np.ndim(out) == 0 else out


def _vals(walk):
    return walk.origin + walk.spacing * np.asarray(walk.positions, dtype=float)


def ito_sum(f, walk, t):
    """``sum_{r <= t 4^m} f(B_m((r-1) 4^-m)) 2^-m X_m(r)``; vectorised over ``t``."""
    n = steps_at(walk, t)
    v = _vals(walk)
    X = np.diff(np.asarray(walk.positions, dtype=np.int64))
    top = int(np.max(n)) if np.size(n) else 0
    terms = f(v[:top]) * walk.spacing * X[:top]
    return _cumulative(np.asarray(terms, dtype=float), n)


def stratonovich_sum(f, walk, t):
    """Midpoint-averaged analogue of :func:`ito_sum`."""
    n = steps_at(walk, t)
    v = _vals(walk)
    X = np.diff(np.asarray(walk.positions, dtype=np.int64))
    top = int(np.max(n)) if np.size(n) else 0
    fv = np.asarray(f(v[: top + 1]), dtype=float)
    terms = 0.5 * (fv[1:] + fv[:-1]) * walk.spacing * X[:top]
    return _cumulative(terms, n)


def _hat_antiderivative(u):
    u = np.clip(u, -1.0, 1.0)
    return np.where(u <= 0, 0.5 * (1 + u) ** 2, 1 - 0.5 * (1 - u) ** 2)


@dataclass(frozen=True)
class ConvexDiffSpec:
    """Difference of convex functions with its left derivative and curvature measure.

    ``atoms`` are ``(location, mass)`` pairs, ``density`` holds
    ``(lo, hi, value)`` pieces with possibly infinite ends. ``support`` is
    the bound ``M`` of a compactly supported measure, or ``None``.
    """

    g: GridFunction
    left_derivative: GridFunction
    atoms: tuple = ()
    density: tuple = ()
    support: float = None

    @classmethod
    def linear(cls, slope=1.0, intercept=0.0):
        return cls(
            g=GridFunction("linear", lambda x: slope * x + intercept, (slope, intercept)),
            left_derivative=GridFunction("const", lambda x: x * 0 + slope, (slope,)),
            support=0.0,
        )

    @classmethod
    def abs(cls, a=0.0):
        """``|x - a|``: left derivative ``-1`` up to and including ``a``, atom of mass 2."""
        return cls(
            g=catalog("abs", a),
            left_derivative=GridFunction("sign-left", lambda x: np.where(x > a, 1.0, -1.0), (a,)),
            atoms=((a, 2.0),),
            support=abs(a),
        )

    @classmethod
    def square(cls):
        return cls(
            g=catalog("square"),
            left_derivative=GridFunction("double", lambda x: 2.0 * x),
            density=((-math.inf, math.inf, 2.0),),
        )

    @classmethod
    def kinks(cls, slope0, kinks, value0=0.0):
        """Piecewise linear ``g`` with ``g(0) = value0``, slope ``slope0`` left of
        every kink and slope jumps ``(location, jump)``."""
        kinks = tuple(sorted((float(x), float(j)) for x, j in kinks))
        locs = np.array([k[0] for k in kinks])
        jumps = np.array([k[1] for k in kinks])

        def deriv(x):
            x = np.asarray(x, dtype=float)
            return slope0 + (jumps * (x[..., None] > locs)).sum(axis=-1)

        def g(x):
            x = np.asarray(x, dtype=float)
            ramp = jumps * (np.maximum(x[..., None] - locs, 0) - np.maximum(-locs, 0))
            return value0 + slope0 * x + ramp.sum(axis=-1)

        return cls(
            g=GridFunction("kinks", g, (slope0, kinks, value0)),
            left_derivative=GridFunction("kinks-deriv", deriv, (slope0, kinks)),
            atoms=kinks,
            support=float(np.max(np.abs(locs))) if kinks else 0.0,
        )

    def atom_mass(self, x):
        return sum(m for loc, m in self.atoms if loc == x)

    def right_derivative(self, x):
        return self.left_derivative(x) + self.atom_mass(x)

    def truncate(self, bound):
        """``g^M``: equal to ``g`` on ``[-M, M]`` and extended linearly outside,
        with the measure restricted to ``[-M, M]``."""
        M = float(bound)
        gM, gmM = self.g(M), self.g(-M)
        right = self.right_derivative(M)
        left = self.left_derivative(-M)
        g, d = self.g, self.left_derivative

        def g_trunc(x):
            x = np.asarray(x, dtype=float)
            return np.where(x > M, gM + right * (x - M),
                            np.where(x < -M, gmM + left * (x + M), g(x)))

        def d_trunc(x):
            x = np.asarray(x, dtype=float)
            return np.where(x > M, right, np.where(x <= -M, left, d(x)))

        return replace(
            self,
            g=GridFunction(f"{self.g.name}^M", g_trunc, (M,)),
            left_derivative=GridFunction(f"{self.left_derivative.name}^M", d_trunc, (M,)),
            atoms=tuple((x, m) for x, m in self.atoms if -M <= x <= M),
            density=tuple((max(lo, -M), min(hi, M), v) for lo, hi, v in self.density if lo < M and hi > -M),
            support=M,
        )

    def lattice_weights(self, x, spacing):
        """Weights ``w`` with ``sum_x L(x) w(x) = int L(y) mu(dy)`` for ``L``
        linear between the lattice points ``x`` (spacing ``spacing``)."""
        x = np.asarray(x, dtype=float)
        w = np.zeros(x.shape)
        for loc, mass in self.atoms:
            theta = 1.0 - np.abs(x - loc) / spacing
            w += mass * np.clip(theta, 0.0, None)
        for lo, hi, value in self.density:
            u_lo = (lo - x) / spacing if np.isfinite(lo) else np.full(x.shape, -1.0)
            u_hi = (hi - x) / spacing if np.isfinite(hi) else np.full(x.shape, 1.0)
            w += value * spacing * (_hat_antiderivative(u_hi) - _hat_antiderivative(u_lo))
        return w


def _two_sided(walk, field):
    if field is None:
        return discrete_local_time(walk, "both")
    if isinstance(field, tuple):
        raise TypeError("pass a two-sided field; build it with direction='both'")
    return field


def ito_tanaka_rhs(spec, walk, t, field=None):
    """Right-hand side of the Ito-Tanaka formula at level ``m``.

    Returns a dict with ``ito_term`` (Ito sum of the left derivative),
    ``integral_term`` (``int L(t, x) mu(dx)`` using the two-sided local time)
    and ``full_rhs = ito_term + integral_term / 2``. Vectorised over ``t``.
    """
    field = _two_sided(walk, field)
    n = steps_at(walk, t)
    ito_term = ito_sum(spec.left_derivative, walk, t)
    weights = lambda xi: spec.lattice_weights(field.origin + field.spacing * xi, field.spacing)
    integral = field.weighted_mass(weights, n)
    integral = float(integral) if np.ndim(integral) == 0 else integral
    return {"ito_term": ito_term, "integral_term": integral, "full_rhs": ito_term + 0.5 * integral}


def _lattice_index(walk, a):
    ratio = (a - walk.origin) / walk.spacing
    k = round(ratio)
    if abs(ratio - k) > 1e-9 * max(1.0, abs(ratio)):
        raise OffLattice(f"{a} is not on the level-{walk.level} lattice about {walk.origin}")
    return int(k)


def tanaka_check(walk, a, t, field=None):
    """``L_m(t, a) - (|B_m(t_m) - a| - |B_m(0) - a| - ito_sum(sgn(. - a), t))``."""
    ai = _lattice_index(walk, a)
    field = _two_sided(walk, field)
    n = int(steps_at(walk, t))
    local = field.spacing * float(field.counts(n, ai))
    end = walk.origin + walk.spacing * float(walk.positions[n])
    sign = GridFunction("sign", lambda x: sgn(x - a).astype(float), (a,))
    tanaka = abs(end - a) - abs(walk.origin - a) - ito_sum(sign, walk, t)
    return local - tanaka


def occupation_check(h, walk, t, field=None):
    """``sum_r h(B_m((r-1) 4^-m)) 4^-m - sum_x h(x) L_m(t, x) 2^-m``."""
    field = _two_sided(walk, field)
    n = int(steps_at(walk, t))
    v = _vals(walk)[:n]
    time_side = math.fsum((np.asarray(h(v), dtype=float) * walk.dt).tolist()) if n else 0.0
    xi, counts = field.profile(n)
    x = field.origin + field.spacing * xi
    space_side = math.fsum((np.asarray(h(x), dtype=float) * counts * field.spacing ** 2).tolist())
    return time_side - space_side


KERNELS = {
    "w": lambda t, w: w,
    "sin": lambda t, w: np.sin(w),
    "tw": lambda t, w: t * w,
    "one": lambda t, w: np.ones_like(w),
    "pos": lambda t, w: (w > 0).astype(float),
    "sin-pos": lambda t, w: np.sin(w) * (w > 0),
}


@dataclass(frozen=True)
class PredictableSpec:
    """Integrand ``Y(t) = kernel(t, W(t))`` truncated to ``[-b, b]``."""

    kernel: Callable = field(compare=False)
    b: float
    name: str = ""

    @classmethod
    def from_id(cls, kernel_id, b):
        """Kernel by id: one of :data:`KERNELS` or ``const:c``."""
        if kernel_id.startswith("const:"):
            c = float(kernel_id.split(":", 1)[1])
            return cls(kernel=lambda t, w: np.full_like(w, c), b=b, name=kernel_id)
        if kernel_id not in KERNELS:
            raise KeyError(f"unknown kernel {kernel_id!r}")
        return cls(kernel=KERNELS[kernel_id], b=b, name=kernel_id)

    def truncated(self, t, w):
        return np.clip(self.kernel(np.asarray(t, dtype=float), np.asarray(w, dtype=float)), -self.b, self.b)

    def __add__(self, other):
        return PredictableSpec(kernel=lambda t, w: self.kernel(t, w) + other.kernel(t, w),
                               b=max(self.b, other.b), name=f"({self.name}+{other.name})")


@dataclass(frozen=True, eq=False)
class SimpleProcess:
    """Values ``xi_r = Y^b(s_m(r))`` held on ``(s_m(r), s_m(r+1)]``."""

    level: int
    stop_times: np.ndarray
    xi: np.ndarray

    def __mul__(self, c):
        return SimpleProcess(self.level, self.stop_times, c * self.xi)

    __rmul__ = __mul__

    def __add__(self, other):
        if self.level != other.level or not np.array_equal(self.stop_times, other.stop_times):
            raise ValueError("simple processes live on different partitions")
        return SimpleProcess(self.level, self.stop_times, self.xi + other.xi)


def simple_process(spec, walk):
    """Sample the truncated integrand at the walk's stopping times."""
    s = np.asarray(walk.stop_times.entries, dtype=float)
    return SimpleProcess(level=walk.level, stop_times=s, xi=spec.truncated(s, _vals(walk)))


def predictable_sum(process, walk, t):
    """``sum_{r <= t 4^m} xi_{r-1} X_m(r) 2^-m``; vectorised over ``t``."""
    n = steps_at(walk, t)
    X = np.diff(np.asarray(walk.positions, dtype=np.int64))
    top = int(np.max(n)) if np.size(n) else 0
    if top > process.xi.size - 1:
        raise OutOfHorizon("process shorter than requested sum")
    return _cumulative(process.xi[:top] * X[:top] * walk.spacing, n)


def _isometry_replication(spec, m, K, fine_level, seed):
    walks = build_nested(seed, fine_level, K)
    walk = embed_nested(walks, m, fine_level, horizon=K)
    process = simple_process(spec, walk)
    n = int(steps_at(walk, K))
    total = predictable_sum(process, walk, K)
    quad = math.fsum((process.xi[:n] ** 2 * walk.dt).tolist())
    return total, quad


def isometry_check(spec, m, K, replications, seed, fine_level=None, threads=1):
    """Monte Carlo estimates of both sides of the isometry at time ``K``.

    Each replication builds its own Brownian path from
    ``derive_seed(seed, r)``. Returns ``lhs`` (mean squared sum), ``rhs``
    (mean of ``sum xi^2 4^-m``), ``stderr`` of their difference, and the
    mean sum with its standard error.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications")
    fine_level = m + 2 if fine_level is None else fine_level
    seeds = [derive_seed(seed, r) for r in range(replications)]
    run = lambda s: _isometry_replication(spec, m, K, fine_level, s)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    sums = np.array([r[0] for r in results])
    quads = np.array([r[1] for r in results])
    diff = sums ** 2 - quads
    root = math.sqrt(replications)
    return {
        "lhs": float(np.mean(sums ** 2)),
        "rhs": float(np.mean(quads)),
        "stderr": float(np.std(diff, ddof=1) / root),
        "mean": float(np.mean(sums)),
        "mean_stderr": float(np.std(sums, ddof=1) / root),
        "replications": replications,
    }

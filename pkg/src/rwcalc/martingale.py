"""
Continuous local martingales through their Dambis-Dubins-Schwarz clock.

Test martingales are either a time-scaled Brownian path ``M(t) = W(c t)``
or a deterministic-volatility integral ``M(t) = int h dW`` with piecewise
constant ``h >= 0``; both have their quadratic variation in closed form, so
the discrete quadratic variation, the Ito sums, the local times and the
time-change identity can be compared against exact values.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .embedding import EmbeddedWalk, PiecewisePath, embed_nested, path_from_walk, skorohod_embed
from .errors import BeyondTotalQV, OutOfHorizon
from .local_time import discrete_local_time, eval_local_time
from .walks import StoppingSequence, build_nested

__all__ = [
    "MartingaleSpec",
    "QuadraticVariation",
    "Martingale",
    "QVReport",
    "MartingaleLocalTime",
    "parse_volatility",
    "realize_martingale",
    "martingale_stopping",
    "discrete_qv",
    "qv_report",
    "ito_sum_m",
    "time_change_residual",
    "martingale_local_time",
    "dds_inverse",
]


def parse_volatility(text):
    """``"0:1,0.5:2"`` -> breakpoints ``(0.0, 0.5)`` and values ``(1.0, 2.0)``."""
    pairs = [item.split(":") for item in text.split(",") if item.strip()]
    breaks = tuple(float(b) for b, _ in pairs)
    values = tuple(float(v) for _, v in pairs)
    return breaks, values


@dataclass(frozen=True)
class MartingaleSpec:
    kind: str = "scaled"
    c: float = 1.0
    breaks: tuple = (0.0,)
    values: tuple = (1.0,)
    fine_level: int = 10
    horizon: float = 1.0

    def __post_init__(self):
        if self.kind not in ("scaled", "vol"):
            raise ValueError("kind must be 'scaled' or 'vol'")
        if self.kind == "scaled" and self.c <= 0:
            raise ValueError("scale c must be positive")
        if self.kind == "vol":
            if not self.breaks or self.breaks[0] != 0.0 or len(self.breaks) != len(self.values):
                raise ValueError("volatility needs breakpoints starting at 0, one value each")
            if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
                raise ValueError("volatility breakpoints must increase")
            if any(v < 0 for v in self.values):
                raise ValueError("volatility must be non-negative")


@dataclass(frozen=True)
class QuadraticVariation:
    """Piecewise linear ``<M>_t`` with ``rates[i]`` on ``[breaks[i], breaks[i+1])``."""

    breaks: tuple
    rates: tuple
    horizon: float

    def _cum(self):
        b = np.array(self.breaks + (math.inf,))
        r = np.array(self.rates)
        widths = np.diff(b)[:-1]
        return b, r, np.concatenate(([0.0], np.cumsum(r[:-1] * widths)))

    def __call__(self, t):
        b, r, Q = self._cum()
        t_arr = np.asarray(t, dtype=float)
        i = np.searchsorted(b, t_arr, side="right") - 1
        out = Q[i] + r[i] * (t_arr - b[i])
        return float(out) if out.ndim == 0 else out

    @property
    def total(self):
        return self(self.horizon)

    def inverse(self, s):
        """``T_s = inf{t >= 0 : <M>_t >= s}``."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr > self.total + 1e-12 * max(1.0, self.total)):
            raise BeyondTotalQV(f"s beyond total quadratic variation {self.total}")
        b, r, Q = self._cum()
        # First piece whose cumulative end reaches s with a positive rate.
        ends = np.concatenate((Q[1:], [math.inf]))
        i = np.searchsorted(ends, s_arr, side="left")
        i = np.minimum(i, len(r) - 1)
        while np.any((r[i] == 0) & (s_arr > Q[i])):
            i = np.where((r[i] == 0) & (s_arr > Q[i]), i + 1, i)
        rate = np.where(r[i] > 0, r[i], 1.0)
        out = np.where(s_arr <= Q[i], b[i], b[i] + (s_arr - Q[i]) / rate)
        return float(out) if out.ndim == 0 else out


def dds_inverse(qv, s):
    """Exact inverse of a closed-form quadratic variation."""
    return qv.inverse(s)


@dataclass(frozen=True, eq=False)
class Martingale:
    """A realised test martingale.

    ``path`` is ``M`` on its own clock, ``dds_path`` is its Dambis-Dubins-
    Schwarz Brownian motion ``W`` with ``M(t) = W(<M>_t)``, and ``walks`` the
    nested walks the Brownian input was built from. Both paths are built on
    first use; the scaled kind never needs them for its embeddings.
    """

    spec: MartingaleSpec
    qv: QuadraticVariation
    walks: list

    @cached_property
    def _brownian(self):
        return path_from_walk(self.walks[-1])

    @cached_property
    def path(self):
        W = self._brownian
        if self.spec.kind == "scaled":
            return PiecewisePath(W.times / self.spec.c, W.values)
        idx = np.searchsorted(np.array(self.spec.breaks), W.times[:-1], side="right") - 1
        h = np.array(self.spec.values)[idx]
        values = np.concatenate(([W.values[0]], W.values[0] + np.cumsum(h * np.diff(W.values))))
        return PiecewisePath(W.times, values)

    @cached_property
    def dds_path(self):
        if self.spec.kind == "scaled":
            return self._brownian
        path = self.path
        clock = self.qv(path.times)
        # Knots where the clock stands still carry no motion of M.
        moving = np.concatenate(([True], np.diff(clock) > 0))
        return PiecewisePath(clock[moving], path.values[moving])

    @property
    def end(self):
        return self.walks[-1].n_steps * self.walks[-1].dt / (self.spec.c if self.spec.kind == "scaled" else 1.0)

    def embedded(self, m):
        """``tau_m`` walk of ``M``; equals :func:`skorohod_embed` of ``path``."""
        if self.spec.kind == "scaled":
            walk = embed_nested(self.walks, m)
            stop = StoppingSequence(walk.stop_times.entries / self.spec.c, complete=False)
            return EmbeddedWalk(m, stop, walk.positions, walk.origin)
        return skorohod_embed(self.path, m)

    def dds_embedded(self, m):
        """``s_m`` walk of the DDS Brownian motion."""
        if self.spec.kind == "scaled":
            walk = embed_nested(self.walks, m)
            return EmbeddedWalk(m, StoppingSequence(walk.stop_times.entries, complete=False),
                                walk.positions, walk.origin)
        return skorohod_embed(self.dds_path, m)


def realize_martingale(spec, seed):
    """Build the test martingale of ``spec`` from a nested Brownian path."""
    if spec.kind == "scaled":
        walks = build_nested(seed, spec.fine_level, spec.c * spec.horizon)
        return Martingale(spec, QuadraticVariation((0.0,), (spec.c,), spec.horizon), walks)
    walks = build_nested(seed, spec.fine_level, spec.horizon)
    qv = QuadraticVariation(tuple(spec.breaks), tuple(v * v for v in spec.values), spec.horizon)
    return Martingale(spec, qv, walks)


def _embedded(source, m):
    if isinstance(source, Martingale):
        return source.embedded(m)
    if isinstance(source, EmbeddedWalk):
        if source.level != m:
            raise ValueError("embedded walk is at a different level")
        return source
    return skorohod_embed(source, m)


def martingale_stopping(path, m, horizon=None):
    """``tau_m`` stopping times and values of ``M``, cut at ``horizon`` if given."""
    walk = _embedded(path, m)
    if horizon is None:
        return walk
    times = walk.stop_times.entries
    keep = int(np.searchsorted(times, horizon, side="right"))
    end = path.end if isinstance(path, Martingale) else getattr(path, "end", math.inf)
    return EmbeddedWalk(m, StoppingSequence(times[:keep], complete=end >= horizon),
                        walk.positions[:keep], walk.origin)


def _count_before(walk, t):
    """``#{r > 0 : tau_m(r) <= t}``."""
    times = walk.stop_times.entries
    return np.searchsorted(times, np.asarray(t, dtype=float), side="right") - 1


def discrete_qv(path, m, t):
    """``N_m(t) = 4^-m #{r > 0 : tau_m(r) <= t}``."""
    walk = _embedded(path, m)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise OutOfHorizon("negative time")
    out = _count_before(walk, t_arr) * 4.0 ** -m
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class QVReport:
    times: np.ndarray
    discrete: np.ndarray
    exact: np.ndarray
    sup_deviation: float


def qv_report(path, m, qv, horizon):
    """``N_m`` at its jump times in ``[0, horizon]`` against the exact ``<M>``.

    ``sup_deviation`` is the exact ``sup_{t <= horizon} |N_m(t) - <M>_t|``:
    on each interval between jumps ``N_m`` is constant and ``<M>`` monotone,
    so the supremum sits at interval ends.
    """
    walk = _embedded(path, m)
    tau = walk.stop_times.entries
    tau = tau[tau <= horizon]
    d = 4.0 ** -m
    levels = np.arange(tau.size) * d
    right = np.concatenate((tau[1:], [horizon]))
    dev = np.maximum(np.abs(levels - qv(tau)), np.abs(levels - qv(right)))
    return QVReport(times=tau, discrete=levels, exact=qv(tau), sup_deviation=float(dev.max()))


def ito_sum_m(f, path, m, t):
    """``sum_{tau_m(r) <= t} f(M(tau_m(r-1))) 2^-m X_m(r)``; vectorised over ``t``."""
    walk = _embedded(path, m)
    n = _count_before(walk, t)
    v = walk.values()
    X = np.diff(walk.positions)
    top = int(np.max(n)) if np.size(n) else 0
    terms = np.asarray(f(v[:top]), dtype=float) * walk.spacing * X[:top]
    cum = np.concatenate(([0.0], np.cumsum(terms, dtype=np.longdouble)))
    out = cum[n].astype(float)
    return float(out) if np.ndim(out) == 0 else out


def time_change_residual(f, spec, m, t, seed, realization=None):
    """``(f(M) . M)^m_t - (f(W) . W)^m_{<M>_t}`` with ``W`` the DDS Brownian motion.

    Both sums run over stopping times, ``tau_m(r) <= t`` and
    ``s_m(r) <= <M>_t`` respectively.
    """
    mart = realize_martingale(spec, seed) if realization is None else realization
    if spec.fine_level < m + 3:
        raise ValueError("fine level must be at least m + 3")
    if np.any(np.asarray(t) > spec.horizon):
        raise OutOfHorizon("t beyond martingale horizon")
    lhs = ito_sum_m(f, mart.embedded(m), m, t)
    rhs = ito_sum_m(f, mart.dds_embedded(m), m, mart.qv(t))
    return lhs - rhs


@dataclass(frozen=True, eq=False)
class MartingaleLocalTime:
    """Up/down local times of the ``tau_m`` walk read on the ``<M>`` clock."""

    up: object
    down: object
    qv: QuadraticVariation

    def __call__(self, t, x, direction="up"):
        field = {"up": self.up, "down": self.down}[direction]
        return eval_local_time(field, self.qv(t), x)


def martingale_local_time(path, m, horizon, qv=None):
    """``L^{M,+-}_m(t, x)``: crossing counts of ``B_m`` over walk times below ``<M>_t``."""
    if isinstance(path, Martingale):
        qv = path.qv if qv is None else qv
    if qv is None:
        raise ValueError("a quadratic variation is needed for a bare path")
    if horizon > qv.horizon:
        raise OutOfHorizon("horizon beyond quadratic variation horizon")
    walk = _embedded(path, m)
    return MartingaleLocalTime(discrete_local_time(walk, "up"), discrete_local_time(walk, "down"), qv)

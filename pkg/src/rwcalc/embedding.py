"""
Skorohod embedding of dyadic walks into continuous piecewise-linear paths.

Stopping times are exact first-passage times of the barriers
``previous value +- 2**-m``, computed segment by segment, so for lattice
paths they land exactly on knots.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import OutOfHorizon
from .walks import LatticeWalk, StoppingSequence, compose_T

__all__ = [
    "PiecewisePath",
    "EmbeddedWalk",
    "path_from_walk",
    "skorohod_embed",
    "embed_nested",
    "equid_bound",
    "equid_diagnostic",
]


@dataclass(frozen=True, eq=False)
class PiecewisePath:
    """Continuous path given by knots, linear in between."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if t[0] != 0.0:
            raise ValueError("knot times must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def end(self):
        return float(self.times[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.end):
            raise OutOfHorizon(f"t outside [0, {self.end}]")
        out = np.interp(t_arr, self.times, self.values)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class EmbeddedWalk:
    """Level-``m`` walk read off a continuous path at its stopping times.

    ``positions`` are integer lattice offsets from ``origin`` in units of
    ``2**-level``; ``stop_times`` are path times.
    """

    level: int
    stop_times: StoppingSequence
    positions: np.ndarray
    origin: float

    @property
    def n_steps(self):
        return int(self.positions.size - 1)

    @property
    def spacing(self):
        return 2.0 ** -self.level

    @property
    def dt(self):
        return 4.0 ** -self.level

    @property
    def complete(self):
        return self.stop_times.complete

    @cached_property
    def increments(self):
        return np.diff(self.positions).astype(np.int8)

    def values(self):
        return self.origin + self.spacing * self.positions

    def as_lattice_walk(self):
        """Same walk on its own clock ``k * 4**-level`` (origin dropped to 0)."""
        return LatticeWalk(level=self.level, increments=self.increments)


def path_from_walk(walk):
    """Shrunken twist-and-shrink walk as a :class:`PiecewisePath`."""
    return PiecewisePath(walk.times(), walk.values())


def skorohod_embed(path, m, horizon=None):
    """Embed the level-``m`` walk into ``path``.

    Collects crossings over the whole path; when ``horizon`` is given the
    walk is cut after ``ceil(horizon * 4**m)`` steps and flagged complete if
    it got that far. Without a horizon it is always flagged incomplete, as
    the path ends before its next crossing.
    """
    delta = 2.0 ** -m
    origin = float(path.values[0])
    y = (path.values - origin) / delta
    t = path.times
    y0, y1 = y[:-1], y[1:]
    up = y1 > y0
    # Lattice levels hit on each segment, excluding the starting knot.
    lo = np.where(up, np.floor(y0) + 1, np.ceil(y0) - 1)
    hi = np.where(up, np.floor(y1), np.ceil(y1))
    counts = np.where(up, hi - lo + 1, lo - hi + 1)
    counts = np.where(y1 == y0, 0, np.maximum(counts, 0)).astype(np.int64)
    seg = np.flatnonzero(counts)
    reps = counts[seg]
    seg_idx = np.repeat(seg, reps)
    # Offset of each event within its segment.
    starts = np.cumsum(reps) - reps
    within = np.arange(reps.sum()) - np.repeat(starts, reps)
    direction = np.where(up[seg_idx], 1.0, -1.0)
    levels = lo[seg_idx] + direction * within
    frac = (levels - y0[seg_idx]) / (y1[seg_idx] - y0[seg_idx])
    times = t[seg_idx] + frac * (t[seg_idx + 1] - t[seg_idx])
    levels = np.concatenate(([0.0], levels)).astype(np.int64)
    times = np.concatenate(([0.0], times))
    # Revisiting the current level is not a crossing.
    keep = np.concatenate(([True], np.diff(levels) != 0))
    levels, times = levels[keep], times[keep]
    complete = False
    if horizon is not None:
        need = math.ceil(horizon * 4 ** m)
        if levels.size - 1 >= need:
            levels, times = levels[: need + 1], times[: need + 1]
            complete = True
    return EmbeddedWalk(
        level=m,
        stop_times=StoppingSequence(entries=times, complete=complete),
        positions=levels,
        origin=origin,
    )


def embed_nested(walks, m, n=None, horizon=None):
    """Embedding of level ``m`` into the twist-and-shrink path of level ``n``.

    Uses the composed bridge indices ``T_{m,n}`` instead of scanning the
    path; :func:`skorohod_embed` on ``path_from_walk(walks[n])`` yields the
    same walk.
    """
    n = len(walks) - 1 if n is None else n
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    coarse = walks[m]
    k = np.arange(coarse.n_steps + 1)
    if m < n:
        # Composition is only defined while each finer level has the bridge.
        limit = coarse.n_steps
        idx = k
        for level in range(m + 1, n + 1):
            T = walks[level]._bridge_ends
            limit = min(limit, int(np.searchsorted(idx, T.size, side="right")) - 1)
            idx = np.concatenate(([0], T))[idx[: limit + 1]]
        k = k[: limit + 1]
        times = idx * 4.0 ** -n
    else:
        times = k * 4.0 ** -m
    positions = coarse.positions[: k.size].astype(np.int64)
    complete = False
    if horizon is not None:
        need = math.ceil(horizon * 4 ** m)
        if positions.size - 1 >= need:
            positions, times = positions[: need + 1], times[: need + 1]
            complete = True
    return EmbeddedWalk(
        level=m,
        stop_times=StoppingSequence(entries=times, complete=complete),
        positions=positions,
        origin=coarse.origin,
    )


def _log_star(x):
    return max(math.log(x), 1.0)


def equid_bound(K, C, m):
    """``(42 C K log*K)^(1/2) m^(1/2) 2^-m``."""
    return math.sqrt(42.0 * C * K * _log_star(K)) * math.sqrt(m) * 2.0 ** -m


def equid_diagnostic(walks, m, n, K, C):
    """Largest deviation of composed Skorohod times from the dyadic grid.

    Returns a dict with ``sup_dev``, ``bound`` and ``within``. The a.s.
    statement behind the bound is probabilistic; ``within`` only reports
    whether this realisation respects it.
    """
    if not n > m >= 1:
        raise ValueError("need n > m >= 1")
    k = np.arange(math.floor(K * 4 ** m) + 1)
    composed = compose_T(walks, m, n, k)
    sup_dev = float(np.max(np.abs(composed * 4.0 ** -n - k * 4.0 ** -m)))
    bound = equid_bound(K, C, m)
    return {"sup_dev": sup_dev, "bound": bound, "within": sup_dev < bound}

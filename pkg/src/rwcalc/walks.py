"""
Raw, twisted and shrunken simple random walks.

All walk state lives on the integer lattice: a walk at level ``m`` is an
array of +-1 increments, and its shrunken view is
``origin + 2**-m * position(t * 4**m)`` with linear interpolation. Real
numbers only appear in :func:`evaluate`.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .coins import CoinMatrix, coins
from .errors import InsufficientBridges, OutOfHorizon, StepBudgetExceeded

__all__ = [
    "LatticeWalk",
    "StoppingSequence",
    "raw_walk",
    "bridge_times",
    "twist",
    "build_nested",
    "evaluate",
    "compose_T",
    "grid_values",
    "DEFAULT_STEP_CAP",
]

DEFAULT_STEP_CAP = 2 ** 34


@dataclass(frozen=True)
class StoppingSequence:
    """Strictly increasing stopping indices (or times) starting at 0."""

    entries: np.ndarray
    complete: bool = True

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]


@dataclass(frozen=True, eq=False)
class LatticeWalk:
    """Walk at refinement level ``level`` with +-1 increments.

    ``origin_units`` is the starting point as an integer multiple of
    ``2**-level``.
    """

    level: int
    increments: np.ndarray
    origin_units: int = 0
    _positions: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=np.int8)
        if inc.size and not np.all(np.abs(inc) == 1):
            raise ValueError("increments must be +-1")
        object.__setattr__(self, "increments", inc)

    @property
    def n_steps(self):
        return int(self.increments.size)

    @property
    def spacing(self):
        return 2.0 ** -self.level

    @property
    def dt(self):
        return 4.0 ** -self.level

    @property
    def origin(self):
        return self.origin_units * self.spacing

    @property
    def horizon(self):
        """Largest real time covered by the shrunken walk."""
        return self.n_steps * self.dt

    @cached_property
    def positions(self):
        """Integer partial sums, ``positions[0] == 0``."""
        pos = np.zeros(self.n_steps + 1, dtype=np.int32)
        np.cumsum(self.increments, out=pos[1:], dtype=np.int32)
        return pos

    @cached_property
    def _pair_sums(self):
        inc = self.increments
        half = inc.size // 2
        return inc[0:2 * half:2] + inc[1:2 * half:2]

    @cached_property
    def _bridge_ends(self):
        # Between bridge ends the walk returns to its even start point at even
        # times, so a bridge ends exactly at the first two-step pair that moves.
        return 2 * (np.flatnonzero(self._pair_sums) + 1)

    def values(self):
        """Shrunken walk values on its time grid ``k * 4**-level``."""
        return self.origin + self.spacing * self.positions

    def times(self):
        return np.arange(self.n_steps + 1) * self.dt


def raw_walk(matrix, m, n):
    """Untwisted walk ``S_m(0..n)`` read from row ``m`` of the coin matrix."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return LatticeWalk(level=m, increments=coins(matrix, m, n))


def bridge_times(walk):
    """Times ``T(k)`` at which the walk visits a new even integer at distance 2.

    The sequence is flagged incomplete when the walk ends strictly inside a
    bridge.
    """
    ends = walk._bridge_ends
    entries = np.concatenate(([0], ends)).astype(np.int64)
    complete = bool(entries[-1] == walk.n_steps)
    return StoppingSequence(entries=entries, complete=complete)


def twist(prev, raw):
    """Flip the bridges of ``raw`` so that it refines ``prev``.

    The output stops after the last bridge needed to cover every increment of
    ``prev``; any raw increments past that point are dropped.
    """
    need = prev.n_steps
    ends = raw._bridge_ends
    if ends.size < need:
        raise InsufficientBridges(
            f"raw walk has {ends.size} complete bridges, {need} required"
        )
    ends = ends[:need]
    # The displacement of a bridge is the sum of its final two steps.
    displacement = raw._pair_sums[ends // 2 - 1] // 2
    sign = displacement * prev.increments
    lengths = np.diff(ends, prepend=0)
    flips = np.repeat(sign, lengths)
    inc = raw.increments[: ends[-1] if need else 0] * flips
    return LatticeWalk(level=raw.level, increments=inc, origin_units=2 * prev.origin_units)


def _raw_for_bridges(matrix, m, bridges, step_cap):
    # Bridge lengths are 2 * Geometric(1/2): mean 4, variance 8.
    n = 4 * bridges + int(10 * math.sqrt(8 * bridges)) + 16
    while True:
        if n > step_cap:
            raise StepBudgetExceeded(f"level {m} needs more than {step_cap} raw steps")
        walk = raw_walk(matrix, m, n)
        if walk._bridge_ends.size >= bridges:
            return walk
        n *= 2


def build_nested(seed, max_level, horizon, step_cap=DEFAULT_STEP_CAP):
    """Twist-and-shrink walks for levels ``0..max_level``.

    Level ``m`` covers at least ``ceil(horizon * 4**m)`` steps. Intermediate
    levels are cut to the horizon plus a slack of order ``2**-m`` (the size
    of the time lag still to come); if a deeper level then falls short, the
    slack is doubled and the construction redone. Twisting is
    prefix-consistent, so the result is a function of
    ``(seed, max_level, horizon)`` alone.
    """
    if max_level < 0 or horizon <= 0:
        raise ValueError("need max_level >= 0 and horizon > 0")
    matrix = seed if isinstance(seed, CoinMatrix) else CoinMatrix(int(seed))
    scale = math.sqrt(max(horizon, 1.0))
    slack = 3.0
    while True:
        n0 = math.ceil(horizon + slack * scale)
        if n0 > step_cap:
            raise StepBudgetExceeded(f"level 0 needs more than {step_cap} steps")
        walks = [raw_walk(matrix, 0, n0)]
        # Index needed at each level so that every k <= horizon * 4**j of
        # every coarser level j keeps its composed bridge index.
        required = math.ceil(horizon)
        short = False
        for m in range(1, max_level + 1):
            raw = _raw_for_bridges(matrix, m, walks[-1].n_steps, step_cap)
            walk = twist(walks[-1], raw)
            if walk.n_steps < math.ceil(horizon * 4 ** m):
                short = True
                break
            required = max(math.ceil(horizon * 4 ** m), int(walk._bridge_ends[required - 1]))
            if m < max_level:
                keep = math.ceil((horizon + slack * scale * 2.0 ** -m) * 4 ** m)
                keep = max(keep, required)
                if keep < walk.n_steps:
                    walk = LatticeWalk(level=m, increments=walk.increments[:keep],
                                       origin_units=walk.origin_units)
            walks.append(walk)
        if not short:
            return walks
        slack *= 2


def evaluate(walk, t):
    """Linearly interpolated shrunken walk at real time(s) ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > walk.horizon):
        raise OutOfHorizon(f"t outside [0, {walk.horizon}]")
    u = t_arr * 4.0 ** walk.level
    k = np.minimum(np.floor(u).astype(np.int64), max(walk.n_steps - 1, 0))
    pos = walk.positions
    if walk.n_steps == 0:
        out = np.full(t_arr.shape, float(walk.origin))
    else:
        frac = u - k
        p = pos[k] + frac * (pos[k + 1] - pos[k])
        out = walk.origin + walk.spacing * p
    return float(out) if out.ndim == 0 else out


def grid_values(walk, fine_level, horizon):
    """Shrunken walk sampled on the finer grid ``j * 4**-fine_level``, ``j*dt <= horizon``."""
    n = int(math.floor(horizon * 4 ** fine_level))
    return evaluate(walk, np.arange(n + 1) * 4.0 ** -fine_level)


def compose_T(walks, m, n, k):
    """Composed bridge index ``T_n o ... o T_{m+1}(k)``; identity when ``n == m``."""
    if n < m:
        raise ValueError("need n >= m")
    k_arr = np.asarray(k, dtype=np.int64)
    if np.any(k_arr < 0) or np.any(k_arr > walks[m].n_steps):
        raise OutOfHorizon(f"index outside level-{m} walk")
    out = k_arr
    for level in range(m + 1, n + 1):
        out = bridge_times(walks[level]).entries[out]
    return int(out) if out.ndim == 0 else out

"""
Discrete up/down local times of lattice walks.

A :class:`LocalTimeField` stores, for each lattice point, the sorted step
indices at which the walk leaves it upward (or downward). The local time at
grid time ``n * 4**-m`` is ``2**-m`` times the number of such events with
index below ``n``; other points are filled in bilinearly.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import OutOfHorizon

__all__ = [
    "LocalTimeField",
    "crossing_counts",
    "discrete_local_time",
    "eval_local_time",
    "occupation_mass",
]

_DIRECTIONS = ("up", "down", "both")


def crossing_counts(positions, n=None):
    """Up- and down-crossing counts of an integer walk before step ``n``.

    Returns ``(x, up, down)`` where ``x`` runs over the integer range visited
    and ``up[i]``/``down[i]`` count steps ``j < n`` leaving ``x[i]`` upward or
    downward.
    """
    pos = np.asarray(positions, dtype=np.int64)
    n = pos.size - 1 if n is None else int(n)
    if n < 0 or n > pos.size - 1:
        raise OutOfHorizon(f"step {n} outside walk of {pos.size - 1} steps")
    start = pos[:n]
    step = pos[1:n + 1] - start
    lo = int(pos[: n + 1].min())
    hi = int(pos[: n + 1].max())
    width = hi - lo + 1
    up = np.bincount(start[step > 0] - lo, minlength=width)
    down = np.bincount(start[step < 0] - lo, minlength=width)
    return np.arange(lo, hi + 1), up, down


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    """Two-parameter crossing-count field of a level-``level`` walk."""

    level: int
    direction: str
    origin: float
    positions: np.ndarray
    x_min: int
    x_max: int
    keys: np.ndarray
    n_steps: int

    @property
    def spacing(self):
        return 2.0 ** -self.level

    @property
    def horizon(self):
        return self.n_steps * 4.0 ** -self.level

    def counts(self, n, xi):
        """Event counts before step(s) ``n`` at integer lattice offset(s) ``xi``."""
        n = np.asarray(n, dtype=np.int64)
        xi = np.asarray(xi, dtype=np.int64)
        inside = (xi >= self.x_min) & (xi <= self.x_max)
        row = np.clip(xi, self.x_min, self.x_max) - self.x_min
        stride = self.n_steps + 1
        base = row * stride
        hi = np.searchsorted(self.keys, base + np.clip(n, 0, self.n_steps), side="left")
        lo = np.searchsorted(self.keys, base, side="left")
        return np.where(inside, hi - lo, 0)

    def profile(self, n):
        """Lattice offsets and counts of every visited point at step ``n``."""
        xi = np.arange(self.x_min, self.x_max + 1)
        return xi, self.counts(np.full(xi.shape, n), xi)

    def _step_mask(self):
        inc = np.diff(self.positions[: self.n_steps + 1])
        if self.direction == "up":
            return inc > 0
        if self.direction == "down":
            return inc < 0
        return np.ones(inc.shape, dtype=bool)

    def weighted_mass(self, weights, n):
        """``sum_x w(x) * L(n, x)`` for step count(s) ``n``.

        ``weights`` maps integer lattice offsets to weights; every step
        ``j < n`` contributes ``2**-m * w(S_j)`` if it belongs to the field's
        direction.
        """
        start = self.positions[: self.n_steps].astype(np.int64)
        contrib = np.where(self._step_mask(), weights(start), 0.0)
        cum = np.concatenate(([0.0], np.cumsum(contrib)))
        n = np.clip(np.asarray(n, dtype=np.int64), 0, self.n_steps)
        return self.spacing * cum[n]


def discrete_local_time(walk, direction="both", horizon=None):
    """Local-time field of a :class:`LatticeWalk` or :class:`EmbeddedWalk`."""
    if direction not in _DIRECTIONS:
        raise ValueError(f"direction must be one of {_DIRECTIONS}")
    n = walk.n_steps
    if horizon is not None:
        n = math.floor(horizon * 4 ** walk.level + 1e-9)
        if n > walk.n_steps:
            raise OutOfHorizon(f"horizon {horizon} beyond walk of {walk.n_steps} steps")
    pos = np.asarray(walk.positions[: n + 1], dtype=np.int64)
    inc = np.diff(pos)
    j = np.arange(n)
    if direction == "up":
        sel = inc > 0
    elif direction == "down":
        sel = inc < 0
    else:
        sel = np.ones(n, dtype=bool)
    x = pos[:-1][sel]
    j = j[sel]
    x_min, x_max = int(pos.min()), int(pos.max())
    order = np.argsort(x, kind="stable")
    keys = (x[order] - x_min) * (n + 1) + j[order]
    return LocalTimeField(
        level=walk.level,
        direction=direction,
        origin=float(walk.origin),
        positions=pos,
        x_min=x_min,
        x_max=x_max,
        keys=keys,
        n_steps=n,
    )


def eval_local_time(field, t, x):
    """Bilinearly interpolated local time at real ``(t, x)``.

    Times beyond the field's horizon are held at the horizon; points off the
    visited range give 0.
    """
    t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    u = np.minimum(t_arr * 4.0 ** field.level, field.n_steps)
    n0 = np.floor(u).astype(np.int64)
    ft = u - n0
    n1 = np.minimum(n0 + 1, field.n_steps)
    xi = (x_arr - field.origin) / field.spacing
    i0 = np.floor(xi).astype(np.int64)
    fx = xi - i0
    c = field.counts
    val = ((1 - ft) * ((1 - fx) * c(n0, i0) + fx * c(n0, i0 + 1))
           + ft * ((1 - fx) * c(n1, i0) + fx * c(n1, i0 + 1)))
    out = field.spacing * val
    return float(out) if out.ndim == 0 else out


def occupation_mass(field, n):
    """``sum_x L(n, x) * 2**-m``; equals ``n * 4**-m`` for a two-sided field."""
    _, counts = field.profile(n)
    return float(counts.sum()) * field.spacing ** 2

"""
Convergence experiments, rate estimation and table I/O.

An experiment builds one nested Brownian path per replication (seeded by
``derive_seed(seed, r)``), measures a metric at every level of the level
range against the fine reference level, and returns a
:class:`ConvergenceTable`. Replications may run on threads; rows are always
merged in replication order, so output is independent of ``threads``.
"""

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
import csv
import io
import json
import math

import numpy as np

from .coins import derive_seed
from .discrete_calculus import ito_sides, ito_tanaka_sides, occupation_sides, stratonovich_sides
from .embedding import embed_nested, equid_diagnostic
from .errors import InsufficientData, InvalidConfig, NonPositiveMetric
from .functions import catalog
from .integrals import ConvexDiffSpec, ito_tanaka_rhs, tanaka_check
from .local_time import discrete_local_time, eval_local_time, occupation_mass
from .martingale import MartingaleSpec, martingale_local_time, qv_report, realize_martingale, time_change_residual
from .walks import build_nested

__all__ = [
    "ExperimentConfig",
    "ConvergenceTable",
    "EXPERIMENTS",
    "run_experiment",
    "estimate_rate",
    "identity_suite",
    "format_value",
]

HEADER = ("experiment", "m", "seed", "metric", "value")


def format_value(x):
    """17 significant digits: lossless for doubles."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    levels: tuple = (4, 5, 6, 7, 8, 9)
    fine_level: int = 12
    horizon: float = 1.0
    replications: int = 1
    function: str = ""
    c: float = 4.0
    threads: int = 1
    local_time_grid: int = 256

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidConfig(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if not self.levels:
            raise InvalidConfig("empty level range")
        if self.fine_level <= max(self.levels):
            raise InvalidConfig("fine level must exceed every level in the range")
        if min(self.levels) < 1:
            raise InvalidConfig("levels start at 1")
        if self.replications < 1:
            raise InvalidConfig("need at least one replication")
        if self.horizon <= 0:
            raise InvalidConfig("horizon must be positive")
        if self.threads < 1:
            raise InvalidConfig("threads must be >= 1")
        return self


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    def add(self, experiment, m, seed, metric, value):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value for {experiment}/{metric} at m={m}")
        self.rows.append((str(experiment), int(m), int(seed), str(metric), value))

    def extend(self, other):
        self.rows.extend(other.rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, ConvergenceTable) and self.rows == other.rows

    def metric(self, metric):
        return [r for r in self.rows if r[3] == metric]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for e, m, s, metric, v in self.rows:
            writer.writerow((e, m, s, metric, format_value(v)))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != HEADER:
            raise ValueError(f"unexpected header {header}")
        table = cls()
        for e, m, s, metric, v in reader:
            table.add(e, int(m), int(s), metric, float(v))
        return table

    def to_json(self):
        rows = [dict(zip(HEADER, (e, m, s, metric, float(format_value(v))))) for e, m, s, metric, v in self.rows]
        return json.dumps(rows, indent=1) + "\n"

    @classmethod
    def from_json(cls, text):
        table = cls()
        for row in json.loads(text):
            table.add(row["experiment"], row["m"], row["seed"], row["metric"], row["value"])
        return table


# -- per-replication metrics --------------------------------------------------

def _fine_grid_values(walks, K):
    fine = walks[-1]
    n = math.floor(K * 4 ** fine.level)
    return fine.values()[: n + 1]


def _brownian(cfg, seed):
    walks = build_nested(seed, cfg.fine_level, cfg.horizon)
    fine = walks[-1]
    ref = _fine_grid_values(walks, cfg.horizon)
    t = np.arange(ref.size) * fine.dt
    out = []
    for m in cfg.levels:
        coarse = walks[m]
        approx = np.interp(t, coarse.times(), coarse.values())
        out.append((m, "sup_error", float(np.max(np.abs(approx - ref)))))
    return out


def _equid(cfg, seed):
    walks = build_nested(seed, cfg.fine_level, cfg.horizon)
    out = []
    for m in cfg.levels:
        report = equid_diagnostic(walks, m, cfg.fine_level, cfg.horizon, 2.0)
        out.append((m, "sup_dev", report["sup_dev"]))
        out.append((m, "within", float(report["within"])))
    return out


def _local_time_grid(cfg, fine):
    times = cfg.horizon * np.arange(cfg.local_time_grid + 1) / cfg.local_time_grid
    dx = 2.0 ** -min(max(cfg.levels), fine.level)
    lo, hi = fine.positions.min() * fine.spacing, fine.positions.max() * fine.spacing
    xs = np.arange(math.floor(lo / dx) - 1, math.ceil(hi / dx) + 2) * dx
    return times, xs


def _localtime(cfg, seed):
    walks = build_nested(seed, cfg.fine_level, cfg.horizon)
    fine = walks[-1]
    times, xs = _local_time_grid(cfg, fine)
    T, X = np.meshgrid(times, xs, indexing="ij")
    ref = eval_local_time(discrete_local_time(fine, "up"), T, X)
    out = []
    for m in cfg.levels:
        coarse = walks[m]
        up = discrete_local_time(coarse, "up")
        gap = np.max(np.abs(eval_local_time(up, T, X) - ref))
        both = discrete_local_time(coarse, "both")
        n_grid = np.unique(np.floor(times * 4 ** m).astype(np.int64))
        occ = max(abs(occupation_mass(both, n) - n * 4.0 ** -m) for n in n_grid)
        out.append((m, "sup_gap", float(gap)))
        out.append((m, "occupation_error", float(occ)))
    return out


def _itotanaka(spec):
    def run(cfg, seed):
        walks = build_nested(seed, cfg.fine_level, cfg.horizon)
        G = spec.g(_fine_grid_values(walks, cfg.horizon))
        a = walks[0].origin
        target = G - spec.g(a)
        out = []
        for m in cfg.levels:
            walk = embed_nested(walks, m, horizon=cfg.horizon)
            n_max = math.floor(cfg.horizon * 4 ** m)
            rhs = ito_tanaka_rhs(spec, walk, np.arange(n_max + 1) * 4.0 ** -m)["full_rhs"]
            # rhs is constant on each level-m cell; compare with the extremes
            # of the fine target inside the cell.
            ratio = 4 ** (cfg.fine_level - m)
            starts = np.arange(n_max + 1) * ratio
            hi = np.maximum.reduceat(target, starts)
            lo = np.minimum.reduceat(target, starts)
            # reduceat cells run to the next start; the last cell is the endpoint alone.
            sup = np.max(np.maximum(np.abs(hi - rhs), np.abs(lo - rhs)))
            out.append((m, "sup_error", float(sup)))
        return out
    return run


def _tanaka(cfg, seed):
    walks = build_nested(seed, cfg.fine_level, cfg.horizon)
    out = []
    for m in cfg.levels:
        walk = embed_nested(walks, m, horizon=cfg.horizon)
        out.append((m, "abs_residual", abs(tanaka_check(walk, walk.origin, cfg.horizon))))
    return out


def _qv(cfg, seed):
    mart = realize_martingale(MartingaleSpec("scaled", c=1.0, fine_level=cfg.fine_level,
                                             horizon=cfg.horizon), seed)
    return [(m, "sup_deviation", qv_report(mart, m, mart.qv, cfg.horizon).sup_deviation)
            for m in cfg.levels]


def _timechange(cfg, seed):
    spec = MartingaleSpec("scaled", c=cfg.c, fine_level=cfg.fine_level, horizon=cfg.horizon)
    mart = realize_martingale(spec, seed)
    f = catalog(cfg.function or "identity")
    return [(m, "abs_residual", abs(time_change_residual(f, spec, m, cfg.horizon, seed, mart)))
            for m in cfg.levels]


def _mlocaltime(cfg, seed):
    spec = MartingaleSpec("scaled", c=cfg.c, fine_level=cfg.fine_level, horizon=cfg.horizon)
    mart = realize_martingale(spec, seed)
    fine = mart.walks[-1]
    times, xs = _local_time_grid(cfg, fine)
    T, X = np.meshgrid(times, xs, indexing="ij")
    # Half the Brownian local time of the DDS motion, on the <M> clock.
    ref = eval_local_time(discrete_local_time(fine, "up"), mart.qv(T), X)
    out = []
    for m in cfg.levels:
        field = martingale_local_time(mart, m, cfg.horizon)
        out.append((m, "sup_gap", float(np.max(np.abs(field(T, X) - ref)))))
    return out


EXPERIMENTS = {
    "brownian": _brownian,
    "equid": _equid,
    "localtime": _localtime,
    "itotanaka-abs": _itotanaka(ConvexDiffSpec.abs(0.0)),
    "itotanaka-square": _itotanaka(ConvexDiffSpec.square()),
    "tanaka": _tanaka,
    "qv": _qv,
    "timechange": _timechange,
    "mlocaltime": _mlocaltime,
}


def run_experiment(config):
    """Run ``config`` and return its :class:`ConvergenceTable`."""
    config.validate()
    metric_fn = EXPERIMENTS[config.experiment]
    seeds = [derive_seed(config.seed, r) for r in range(config.replications)]
    work = lambda s: metric_fn(config, s)
    if config.threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            results = list(pool.map(work, seeds))
    else:
        results = [work(s) for s in seeds]
    table = ConvergenceTable()
    for s, rows in zip(seeds, results):
        for m, metric, value in rows:
            table.add(config.experiment, m, s, metric, value)
    return table


def estimate_rate(table, metric):
    """Least-squares slope of ``log2(median over seeds)`` against ``m``."""
    by_level = {}
    for _, m, _, name, value in table.rows:
        if name == metric:
            by_level.setdefault(m, []).append(value)
    if len(by_level) < 3:
        raise InsufficientData(f"{len(by_level)} levels with metric {metric!r}; need 3")
    levels = np.array(sorted(by_level))
    medians = np.array([np.median(by_level[m]) for m in levels])
    if np.any(medians <= 0):
        raise NonPositiveMetric(f"metric {metric!r} has non-positive medians")
    return float(np.polyfit(levels, np.log2(medians), 1)[0])


# -- random identity suite ----------------------------------------------------

SUITE_FUNCTIONS = ("identity", "square", "abs", "sign", "sine", "exp", "indicator", "pwlinear", "const")

IDENTITIES = {
    "stratonovich": stratonovich_sides,
    "ito": ito_sides,
    "ito_tanaka": ito_tanaka_sides,
    "occupation": occupation_sides,
}


def _suite_function(name, rng, a, scale):
    # Shifts and rates live on the scale of the walk's excursions about a.
    shift = a + float(rng.uniform(-1, 1)) * scale
    if name in ("abs", "sign", "indicator"):
        return catalog(name, shift)
    if name == "sine":
        return catalog("sine", float(rng.uniform(0.1, 3.0)) / scale)
    if name == "exp":
        return catalog("exp", float(rng.uniform(-2, 2)) / scale)
    if name == "const":
        return catalog("const", float(rng.normal()))
    if name == "pwlinear":
        xs = a + np.sort(rng.uniform(-2, 2, size=4)) * scale
        ys = rng.normal(size=4)
        return catalog("pwlinear:" + ":".join(f"{float(x)!r}/{float(y)!r}" for x, y in zip(xs, ys)))
    return catalog(name)


def identity_suite(cases=1000, max_n=4096, seed=0):
    """Worst relative residual ``|lhs - rhs| / (1 + |lhs|)`` of each identity.

    Cases draw a catalog function, a length ``n <= max_n``, a step
    ``dx`` in ``{1, 2^-m}`` and a start point; the signs come from an
    independent generator.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    worst = {name: 0.0 for name in IDENTITIES}
    for _ in range(cases):
        n = int(rng.integers(0, max_n + 1))
        dx = 1.0 if rng.random() < 0.5 else 2.0 ** -int(rng.integers(1, 13))
        a = float(rng.integers(-8, 9)) * dx + (float(rng.normal()) if rng.random() < 0.5 else 0.0)
        signs = 2 * rng.integers(0, 2, size=n) - 1
        scale = dx * math.sqrt(max(n, 1))
        f = _suite_function(SUITE_FUNCTIONS[int(rng.integers(len(SUITE_FUNCTIONS)))], rng, a, scale)
        for name, sides in IDENTITIES.items():
            lhs, rhs = sides(f, a, dx, signs)
            worst[name] = max(worst[name], abs(lhs - rhs) / (1 + abs(lhs)))
    return worst


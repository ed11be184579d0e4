"""``rwcalc`` command line interface.

Exit status: 0 on success, 2 on an invalid configuration, 3 when a step
budget is exhausted.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .coins import parse_seed
from .embedding import path_from_walk, skorohod_embed
from .errors import InvalidConfig, OffLattice, OutOfHorizon, StepBudgetExceeded
from .functions import catalog
from .harness import ExperimentConfig, estimate_rate, format_value, identity_suite, run_experiment
from .integrals import PredictableSpec, isometry_check, ito_sum, stratonovich_sum
from .local_time import discrete_local_time, eval_local_time
from .martingale import MartingaleSpec, parse_volatility, qv_report, realize_martingale
from .walks import DEFAULT_STEP_CAP, build_nested

EXIT_INVALID = 2
EXIT_BUDGET = 3


def _emit(args, columns, rows):
    if args.format == "json":
        text = json.dumps([dict(zip(columns, r)) for r in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([format_value(v) if isinstance(v, (float, np.floating)) else v for v in r])
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _level_range(text):
    lo, _, hi = text.partition("..")
    lo = int(lo)
    hi = int(hi) if hi else lo
    if hi < lo:
        raise argparse.ArgumentTypeError("empty level range")
    return tuple(range(lo, hi + 1))


def cmd_construct(args):
    walks = build_nested(args.seed, args.level, args.horizon, args.step_cap)
    walk = walks[args.level]
    n = math.floor(args.horizon * 4 ** args.level)
    v = walk.values()[: n + 1]
    t = walk.times()[: n + 1]
    _emit(args, ("t", "value"), zip(t.tolist(), v.tolist()))


def cmd_embed(args):
    if args.fine_level < args.level:
        raise InvalidConfig("fine level must be at least the embedding level")
    walks = build_nested(args.seed, args.fine_level, args.horizon, args.step_cap)
    walk = skorohod_embed(path_from_walk(walks[args.fine_level]), args.level, args.horizon)
    s = walk.stop_times.entries
    _emit(args, ("k", "s_m", "value"), zip(range(s.size), s.tolist(), walk.values().tolist()))


def cmd_localtime(args):
    walks = build_nested(args.seed, args.level, args.horizon, args.step_cap)
    walk = walks[args.level]
    up = discrete_local_time(walk, "up", args.horizon)
    down = discrete_local_time(walk, "down", args.horizon)
    times = args.horizon * np.arange(args.grid_t + 1) / args.grid_t
    xs = walk.origin + walk.spacing * np.arange(up.x_min, up.x_max + 1)
    T, X = np.meshgrid(times, xs, indexing="ij")
    U, D = eval_local_time(up, T, X), eval_local_time(down, T, X)
    rows = zip(T.ravel().tolist(), X.ravel().tolist(), U.ravel().tolist(), D.ravel().tolist())
    _emit(args, ("t", "x", "up", "down"), rows)


def cmd_identities(args):
    worst = identity_suite(args.cases, args.max_n, args.seed)
    _emit(args, ("identity", "max_relative_residual"), sorted(worst.items()))


def cmd_integrate(args):
    from .embedding import embed_nested
    fine = args.fine_level if args.fine_level is not None else args.level + 3
    walks = build_nested(args.seed, fine, args.horizon, args.step_cap)
    walk = embed_nested(walks, args.level, fine, horizon=args.horizon)
    f = catalog(args.function)
    n = math.floor(args.horizon * 4 ** args.level)
    t = np.arange(n + 1) * 4.0 ** -args.level
    ito = ito_sum(f, walk, t)
    strat = stratonovich_sum(f, walk, t)
    rows = zip(t.tolist(), walk.stop_times.entries[: n + 1].tolist(), walk.values()[: n + 1].tolist(),
               ito.tolist(), strat.tolist())
    _emit(args, ("t", "s_m", "value", "ito", "stratonovich"), rows)


def cmd_isometry(args):
    spec = PredictableSpec.from_id(args.kernel, args.b)
    result = isometry_check(spec, args.level, args.horizon, args.replications, args.seed,
                            fine_level=args.fine_level)
    _emit(args, tuple(result), [tuple(result.values())])


def cmd_martingale(args):
    if args.kind == "vol":
        if not args.h:
            raise InvalidConfig("--h is required for --kind vol")
        breaks, values = parse_volatility(args.h)
        spec = MartingaleSpec("vol", breaks=breaks, values=values,
                              fine_level=args.fine_level, horizon=args.horizon)
    else:
        spec = MartingaleSpec("scaled", c=args.c, fine_level=args.fine_level, horizon=args.horizon)
    if args.fine_level < args.level + 3:
        raise InvalidConfig("fine level must be at least level + 3")
    mart = realize_martingale(spec, args.seed)
    report = qv_report(mart, args.level, mart.qv, args.horizon)
    walk = mart.embedded(args.level)
    k = np.arange(report.times.size)
    rows = zip(k.tolist(), report.times.tolist(), walk.values()[: k.size].tolist(),
               report.discrete.tolist(), report.exact.tolist())
    _emit(args, ("k", "tau_m", "value", "N_m", "qv"), rows)
    print(f"sup |N_m - <M>| = {report.sup_deviation:.6g}", file=sys.stderr)


def cmd_converge(args):
    config = ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        levels=args.levels,
        fine_level=args.fine_level,
        horizon=args.horizon,
        replications=args.replications,
        function=args.function or "",
        c=args.c,
        threads=args.threads,
    )
    table = run_experiment(config)
    text = table.to_json() if args.format == "json" else table.to_csv()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    for metric in sorted({r[3] for r in table.rows}):
        try:
            slope = estimate_rate(table, metric)
            print(f"{args.experiment} {metric}: log2-slope {slope:.4f}", file=sys.stderr)
        except (ValueError, ArithmeticError) as exc:
            print(f"{args.experiment} {metric}: {exc}", file=sys.stderr)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=parse_seed, default=0, help="decimal or 0x-hex")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP,
                        help="largest raw walk length tried per level")

    parser = argparse.ArgumentParser(prog="rwcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="twist-and-shrink path dump")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("embed", parents=[common], help="Skorohod embedding into a nested path")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--fine-level", type=int, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("localtime", parents=[common], help="up/down local time field")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--grid-t", type=int, default=64)
    p.set_defaults(func=cmd_localtime)

    p = sub.add_parser("identities", parents=[common], help="random check of the discrete identities")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--max-n", type=int, default=4096)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("integrate", parents=[common], help="Ito and Stratonovich sums")
    p.add_argument("--function", required=True, help="catalog id, e.g. identity, abs:0, sign:0")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--fine-level", type=int, default=None)
    p.add_argument("--horizon", type=float, default=1.0)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("isometry", parents=[common], help="Monte Carlo isometry check")
    p.add_argument("--kernel", default="w")
    p.add_argument("--b", type=float, default=3.0)
    p.add_argument("--level", type=int, default=6)
    p.add_argument("--fine-level", type=int, default=None)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--replications", type=int, default=2000)
    p.set_defaults(func=cmd_isometry)

    p = sub.add_parser("martingale", parents=[common], help="discrete quadratic variation of a test martingale")
    p.add_argument("--kind", choices=("scaled", "vol"), default="scaled")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--h", default=None, help='volatility "t0:h0,t1:h1,..."')
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--fine-level", type=int, required=True)
    p.add_argument("--horizon", type=float, default=1.0)
    p.set_defaults(func=cmd_martingale)

    p = sub.add_parser("converge", parents=[common], help="convergence table and rate")
    p.add_argument("--experiment", required=True)
    p.add_argument("--levels", type=_level_range, default=(4, 5, 6, 7, 8, 9), help="e.g. 4..9")
    p.add_argument("--fine-level", type=int, default=12)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--replications", type=int, default=20)
    p.add_argument("--function", default=None)
    p.add_argument("--c", type=float, default=4.0)
    p.set_defaults(func=cmd_converge)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else 0
    try:
        args.func(args)
    except StepBudgetExceeded as exc:
        print(f"rwcalc: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidConfig, OutOfHorizon, OffLattice, ValueError, KeyError) as exc:
        print(f"rwcalc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())

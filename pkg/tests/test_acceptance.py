"""Acceptance criteria at full desk scale.

Each suite produces a :class:`ConvergenceTable`; criterion 10 re-runs every
suite with the same seeds and compares the CSV bytes. One PASS/FAIL line per
criterion is printed and repeated in the terminal summary.
"""

import gc
import math
import time

import numpy as np

from rwcalc import (
    ConvergenceTable,
    ExperimentConfig,
    MartingaleSpec,
    PiecewisePath,
    PredictableSpec,
    bridge_times,
    build_nested,
    catalog,
    derive_seed,
    discrete_qv,
    estimate_rate,
    identity_suite,
    isometry_check,
    ito_sum,
    run_experiment,
    time_change_residual,
)

from conftest import record_acceptance

SEEDS = 20
MASTER = 20240917
SLOPE_WINDOW = (-0.75, -0.25)

TABLES = {}
ELAPSED = {}


def _median(table, metric, m):
    return float(np.median([r[4] for r in table.metric(metric) if r[1] == m]))


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def suite_identities():
    worst = identity_suite(cases=1000, max_n=4096, seed=MASTER)
    table = ConvergenceTable()
    for name, value in sorted(worst.items()):
        table.add("identities", 0, MASTER, name, value)
    return table


def suite_refinement():
    table = ConvergenceTable()
    for r in range(SEEDS):
        seed = derive_seed(MASTER, r)
        walks = build_nested(seed, 11, 1.0)
        for m in range(1, 12):
            coarse, fine = walks[m - 1], walks[m]
            T = bridge_times(fine).entries
            n = min(coarse.n_steps, T.size - 1)
            got = fine.positions[T[: n + 1]].astype(np.int64)
            want = 2 * coarse.positions[: n + 1].astype(np.int64)
            table.add("refinement", m, seed, "bridges", n)
            table.add("refinement", m, seed, "mismatches", int(np.count_nonzero(got != want)))
        del walks
        gc.collect()
    return table


def suite_ito_closed_form():
    table = ConvergenceTable()
    for r in range(SEEDS):
        seed = derive_seed(MASTER, r)
        walks = build_nested(seed, 12, 1.0)
        for m in range(13):
            walk = walks[m]
            n = np.arange(4 ** m + 1)
            t = n * 4.0 ** -m
            got = ito_sum(catalog("identity"), walk, t)
            b, a = walk.values()[n], walk.origin
            expected = (b * b - a * a - t) / 2
            # Relative error, floored at one step's quadratic increment so
            # that zero crossings of the closed form stay well defined.
            rel = np.abs(got - expected) / np.maximum(np.abs(expected), 4.0 ** -m)
            table.add("ito_closed_form", m, seed, "max_relative_error", float(rel.max()))
        del walks
        gc.collect()
    return table


def experiment(name, levels, fine, **extra):
    return run_experiment(ExperimentConfig(name, seed=MASTER, levels=levels, fine_level=fine,
                                           replications=SEEDS, **extra))


def suite_brownian():
    return experiment("brownian", tuple(range(4, 11)), 12)


def suite_localtime():
    return experiment("localtime", tuple(range(4, 10)), 12)


def suite_itotanaka():
    table = experiment("itotanaka-abs", tuple(range(4, 10)), 12)
    table.extend(experiment("itotanaka-square", tuple(range(4, 10)), 12))
    table.extend(experiment("tanaka", (10,), 11))
    return table


def suite_isometry():
    out = isometry_check(PredictableSpec.from_id("w", 3.0), 6, 1.0, 2000, MASTER)
    table = ConvergenceTable()
    for key in ("lhs", "rhs", "stderr", "mean", "mean_stderr"):
        table.add("isometry", 6, MASTER, key, out[key])
    return table


def suite_qv():
    table = experiment("qv", (8, 10), 13)
    line = PiecewisePath([0.0, 1.0], [0.0, 1.0])
    for m in range(1, 13):
        exact = 2.0 ** (-2 * m) * math.floor(2 ** m)
        table.add("qv-linear", m, 0, "abs_error", abs(discrete_qv(line, m, 1.0) - exact))
    return table


def suite_timechange():
    table = experiment("timechange", (8,), 11, c=4.0, function="identity")
    spec = MartingaleSpec("scaled", c=1.0, fine_level=11)
    for r in range(SEEDS):
        seed = derive_seed(MASTER, r)
        table.add("timechange-unit", 8, seed, "abs_residual",
                  abs(time_change_residual(catalog("identity"), spec, 8, 1.0, seed)))
    return table


SUITES = {
    1: suite_identities,
    2: suite_refinement,
    3: suite_brownian,
    4: suite_localtime,
    5: suite_ito_closed_form,
    6: suite_itotanaka,
    7: suite_isometry,
    8: suite_qv,
    9: suite_timechange,
}


def table_for(number):
    if number not in TABLES:
        TABLES[number], ELAPSED[number] = _timed(SUITES[number])
        gc.collect()
    return TABLES[number]


def test_criterion_01_exact_identities():
    table = table_for(1)
    worst = max(r[4] for r in table.rows)
    ok = worst <= 1e-9 and ELAPSED[1] < 10
    record_acceptance(1, "exact identities", ok,
                      f"max relative residual {worst:.2e} (<= 1e-9), {ELAPSED[1]:.1f}s (< 10s)")
    assert ok


def test_criterion_02_refinement():
    table = table_for(2)
    mismatches = sum(r[4] for r in table.metric("mismatches"))
    bridges = sum(r[4] for r in table.metric("bridges"))
    ok = mismatches == 0 and ELAPSED[2] < 30
    record_acceptance(2, "refinement property", ok,
                      f"{int(mismatches)} mismatches over {int(bridges)} bridges, {ELAPSED[2]:.1f}s (< 30s)")
    assert ok


def test_criterion_03_brownian_rate():
    table = table_for(3)
    slope = estimate_rate(table, "sup_error")
    bounds = {m: 27 * m ** 0.75 * 2.0 ** (-m / 2) for m in (6, 8)}
    medians = {m: _median(table, "sup_error", m) for m in (6, 8)}
    ok = SLOPE_WINDOW[0] <= slope <= SLOPE_WINDOW[1] and all(medians[m] <= bounds[m] for m in bounds)
    record_acceptance(3, "Brownian convergence rate", ok,
                      f"slope {slope:.3f}; median sup error m=6 {medians[6]:.3f} (<= {bounds[6]:.3f}), "
                      f"m=8 {medians[8]:.3f} (<= {bounds[8]:.3f})")
    assert ok


def test_criterion_04_local_time():
    table = table_for(4)
    slope = estimate_rate(table, "sup_gap")
    occupation = max(r[4] for r in table.metric("occupation_error"))
    ok = SLOPE_WINDOW[0] <= slope <= SLOPE_WINDOW[1] and occupation == 0.0
    record_acceptance(4, "local time", ok,
                      f"sup gap slope {slope:.3f}; max occupation error {occupation:g} (exact 0)")
    assert ok


def test_criterion_05_ito_closed_form():
    table = table_for(5)
    worst = max(r[4] for r in table.rows)
    ok = worst <= 1e-12
    record_acceptance(5, "Ito closed form", ok, f"max relative error {worst:.2e} over m <= 12 (<= 1e-12)")
    assert ok


def test_criterion_06_ito_tanaka():
    table = table_for(6)
    slopes = {}
    for name in ("itotanaka-abs", "itotanaka-square"):
        part = ConvergenceTable([r for r in table.rows if r[0] == name])
        slopes[name] = estimate_rate(part, "sup_error")
    tanaka = _median(table, "abs_residual", 10)
    ok = all(SLOPE_WINDOW[0] <= s <= SLOPE_WINDOW[1] for s in slopes.values()) and tanaka <= 0.1
    record_acceptance(6, "Ito-Tanaka", ok,
                      f"slope |x| {slopes['itotanaka-abs']:.3f}, x^2 {slopes['itotanaka-square']:.3f}; "
                      f"Tanaka median residual at m=10 {tanaka:.2e} (<= 0.1)")
    assert ok


def test_criterion_07_isometry():
    values = {r[3]: r[4] for r in table_for(7).rows}
    gap = abs(values["lhs"] - values["rhs"])
    ok = gap <= 3 * values["stderr"] and abs(values["mean"]) <= 3 * values["mean_stderr"]
    record_acceptance(7, "isometry", ok,
                      f"|lhs - rhs| = {gap:.4f} (<= {3 * values['stderr']:.4f}); "
                      f"|mean| = {abs(values['mean']):.4f} (<= {3 * values['mean_stderr']:.4f})")
    assert ok


def test_criterion_08_quadratic_variation():
    table = table_for(8)
    medians = {m: _median(table, "sup_deviation", m) for m in (8, 10)}
    bounds = {m: m * math.sqrt(m) * 2.0 ** -m for m in medians}
    linear = max(r[4] for r in table.metric("abs_error"))
    ok = all(medians[m] <= bounds[m] for m in medians) and linear == 0.0
    record_acceptance(8, "quadratic variation", ok,
                      f"median sup deviation m=8 {medians[8]:.2e} (<= {bounds[8]:.2e}), "
                      f"m=10 {medians[10]:.2e} (<= {bounds[10]:.2e}); linear path error {linear:g}")
    assert ok


def test_criterion_09_time_change():
    table = table_for(9)
    scaled = _median(ConvergenceTable([r for r in table.rows if r[0] == "timechange"]), "abs_residual", 8)
    unit = max(r[4] for r in table.rows if r[0] == "timechange-unit")
    ok = scaled <= 0.1 and unit == 0.0
    record_acceptance(9, "time change", ok,
                      f"c=4 median residual {scaled:.2e} (<= 0.1); c=1 max residual {unit:g} (exact 0)")
    assert ok


def test_criterion_10_determinism():
    changed = []
    for number, suite in SUITES.items():
        first = table_for(number).to_csv()
        again = suite().to_csv()
        gc.collect()
        if again.encode() != first.encode():
            changed.append(number)
    ok = not changed
    record_acceptance(10, "determinism", ok,
                      f"{len(SUITES) - len(changed)}/{len(SUITES)} suites byte-identical on re-run")
    assert ok

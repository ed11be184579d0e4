"""Nested random walks that converge to a Brownian path.

Run with ``python demos/01_nested_walks.py``. The script builds one nested
family of walks, shows that each level refines the one before it, and
watches the uniform distance to a fine reference shrink.
"""

import numpy as np

from rwcalc import ExperimentConfig, bridge_times, build_nested, estimate_rate, run_experiment

SEED = 7

walks = build_nested(SEED, 10, horizon=1.0)
print("Levels built:", len(walks))
for m in (0, 1, 2):
    w = walks[m]
    print(f"  level {m}: {w.n_steps} steps, first values {np.round(w.values()[:6], 3).tolist()}")

# Refinement: sampled at its bridge times, level m+1 (in lattice units)
# is exactly twice level m.
coarse, fine = walks[4], walks[5]
T = bridge_times(fine).entries[: coarse.n_steps + 1]
same = np.array_equal(fine.positions[T], 2 * coarse.positions[: T.size])
print(f"\nLevel 5 at its bridge times reproduces level 4: {same}")

# How far is level m from the level-10 path on [0, 1]?
fine = walks[10]
t = fine.times()[: 4 ** 10 + 1]
ref = fine.values()[: t.size]
print("\nUniform distance to the level-10 path:")
for m in range(3, 9):
    approx = np.interp(t, walks[m].times(), walks[m].values())
    print(f"  m = {m}: {np.max(np.abs(approx - ref)):.4f}")

# The same thing over several seeds, with the rate fitted on medians.
table = run_experiment(ExperimentConfig("brownian", seed=SEED, levels=(3, 4, 5, 6, 7), fine_level=10,
                                        replications=8))
print(f"\nlog2 slope of the median error over 8 seeds: {estimate_rate(table, 'sup_error'):.3f}"
      " (an m^(3/4) 2^(-m/2) rate gives about -0.3 at these levels)")

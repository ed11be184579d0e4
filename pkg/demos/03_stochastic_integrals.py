"""Ito and Stratonovich sums, and the isometry for a truncated integrand.

Run with ``python demos/03_stochastic_integrals.py``.
"""

import numpy as np

from rwcalc import PredictableSpec, build_nested, catalog, isometry_check, ito_sum, stratonovich_sum

walks = build_nested(3, 8, horizon=1.0)
walk = walks[8]
t = np.array([0.25, 0.5, 0.75, 1.0])
b = walk.values()[(t * 4 ** 8).astype(int)]

ito = ito_sum(catalog("identity"), walk, t)
strat = stratonovich_sum(catalog("identity"), walk, t)
print("   t    Ito sum of B dB   (B^2 - t)/2   Stratonovich   B^2/2")
for row in zip(t, ito, (b ** 2 - t) / 2, strat, b ** 2 / 2):
    print("  {:.2f}   {:+.6f}         {:+.6f}     {:+.6f}      {:+.6f}".format(*row))

# The Ito sum of a bounded adapted integrand has mean zero and second
# moment equal to the expected time integral of its square.
out = isometry_check(PredictableSpec.from_id("sin", 1.0), m=4, K=1.0, replications=300, seed=5)
print(f"\nE[(sum)^2] = {out['lhs']:.4f}, E[int Y^2 dt] = {out['rhs']:.4f}, "
      f"standard error {out['stderr']:.4f}; mean {out['mean']:+.4f}")

"""A martingale is a Brownian motion on its own clock.

Run with ``python demos/04_time_change.py``.
"""

import numpy as np

from rwcalc import MartingaleSpec, catalog, discrete_qv, qv_report, realize_martingale, time_change_residual
from rwcalc.martingale import parse_volatility

breaks, values = parse_volatility("0:1,0.5:2")
spec = MartingaleSpec("vol", breaks=breaks, values=values, fine_level=10)
mart = realize_martingale(spec, seed=21)

# Counting lattice crossings estimates the quadratic variation.
t = np.array([0.25, 0.5, 0.75, 1.0])
print("   t    N_m (m=6)   <M>_t")
for ti, n, q in zip(t, discrete_qv(mart, 6, t), mart.qv(t)):
    print(f"  {ti:.2f}   {n:.4f}      {q:.4f}")
for m in (3, 5, 7):
    print(f"sup |N_m - <M>| at m = {m}: {qv_report(mart, m, mart.qv, 1.0).sup_deviation:.4f}")

# Reading the DDS Brownian motion at <M>_t gives back M(t).
grid = np.linspace(0, 1, 5)
print("\nM(t)       W(<M>_t)")
for a, b in zip(mart.path(grid), mart.dds_path(mart.qv(grid))):
    print(f"{a:+.5f}   {b:+.5f}")

# The Ito sum of M against itself equals that of W up to the new clock.
scaled = MartingaleSpec("scaled", c=4.0, fine_level=9)
print("\ntime-change residual, M(t) = W(4t), m = 6:",
      time_change_residual(catalog("identity"), scaled, 6, 1.0, seed=2))

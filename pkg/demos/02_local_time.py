"""Local time from crossing counts, and the discrete Tanaka formula.

Run with ``python demos/02_local_time.py``.
"""

import numpy as np

from rwcalc import (
    ConvexDiffSpec,
    build_nested,
    discrete_local_time,
    embed_nested,
    eval_local_time,
    ito_tanaka_rhs,
    occupation_mass,
    tanaka_check,
)

walks = build_nested(11, 9, horizon=1.0)

# Up-crossing local time at level 0 of the walk, for growing m.
print("Up-crossing local time at x = 0, t = 1:")
for m in (3, 5, 7, 9):
    field = discrete_local_time(walks[m], "up", horizon=1.0)
    print(f"  m = {m}: {eval_local_time(field, 1.0, 0.0):.4f}")

# Every step is counted once by the two-sided field, so the total mass
# is elapsed time.
field = discrete_local_time(walks[6], "both", horizon=1.0)
for n in (64, 1024, 4096):
    print(f"occupation mass after {n} steps: {occupation_mass(field, n):.6f} (t = {n / 4 ** 6:.6f})")

# Tanaka: |B - a| - |B(0) - a| - sum sgn(B - a) dB equals the local time at a.
walk = embed_nested(walks, 7, horizon=1.0)
print(f"\nTanaka residual at a = 0, m = 7: {tanaka_check(walk, 0.0, 1.0):.2e}")

# Ito-Tanaka for g(x) = x^2: the curvature term is 2t, the rest is the Ito sum.
t = np.array([0.25, 0.5, 1.0])
out = ito_tanaka_rhs(ConvexDiffSpec.square(), walk, t)
b = walk.values()[(t * 4 ** 7).astype(int)]
print("\ng(x) = x^2:   t   integral term   full rhs   g(B_t)")
for row in zip(t, out["integral_term"], out["full_rhs"], b ** 2):
    print("           {:.2f}   {:.4f}          {:.4f}     {:.4f}".format(*row))

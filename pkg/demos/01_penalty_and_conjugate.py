#!/usr/bin/env python3
"""Tour of the level penalty, its conjugate, and the smoothed conjugate.

The whole method rests on one construction: interpolate the parabola u^2 at
the admissible levels to get a convex piecewise-affine penalty L, and take
its convex conjugate L*.  The slopes of L* are exactly the levels, so the
(sub)gradient of L* can only ever answer with an admissible level -- that is
where the staircase structure of the optimal controls comes from.

Run:  python3 demos/01_penalty_and_conjugate.py
Writes penalty_conjugate.png next to the script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from shmdual import (
    ConjugateTable,
    LevelSet,
    conjugate_eval,
    conjugate_subdiff,
    penalty_eval,
    smoothed_conjugate_grad,
)

levels = LevelSet.uniform(5)
table = ConjugateTable.from_levels(levels)
print(f"levels: {levels.levels}")
print(f"conjugate breakpoints: {table.breakpoints}")

# the penalty touches the parabola at every level and stays above it between
u = np.linspace(-1, 1, 1001)
pen = penalty_eval(u, levels)
print(f"max penalty on [-1, 1]: {pen.max():.3f} (attained at the endpoints)")

# the conjugate is piecewise affine; its subdifferential is the level set
omega = np.linspace(-3.5, 3.5, 1401)
conj = conjugate_eval(omega, table)
lo, hi = conjugate_subdiff(omega, table)
print("subdifferential at a breakpoint spans two adjacent levels:",
      conjugate_subdiff(float(table.breakpoints[1]), table))

# smoothing: the Moreau envelope keeps the flat stretches untouched and
# rounds each kink over a band of width mu * (level gap)
mu = 0.25
smooth_vals, smooth_grads = smoothed_conjugate_grad(omega, mu, table)

fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
axes[0].plot(u, u**2, "--", color="0.6", label="u^2")
axes[0].plot(u, pen, label="penalty")
axes[0].plot(levels.as_array(), levels.as_array() ** 2, "ko", ms=4)
axes[0].set_title("piecewise-affine penalty")
axes[0].set_xlabel("u")
axes[0].legend()

axes[1].plot(omega, conj, label="conjugate")
axes[1].plot(omega, smooth_vals, label=f"envelope, mu={mu}")
axes[1].set_title("conjugate and Moreau envelope")
axes[1].set_xlabel("omega")
axes[1].legend()

axes[2].step(omega, lo, where="post", label="subdifferential (lower)")
axes[2].plot(omega, smooth_grads, label="envelope gradient")
axes[2].set_title("slopes are admissible levels")
axes[2].set_xlabel("omega")
axes[2].legend()

fig.tight_layout()
out = Path(__file__).with_name("penalty_conjugate.png")
fig.savefig(out, dpi=130)
print(f"wrote {out}")

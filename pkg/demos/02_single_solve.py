#!/usr/bin/env python3
"""One complete solve: targets in, staircase signal out.

Asks for fundamental cosine and sine coefficients of 0.5 while zeroing the
5th, 7th, 11th and 13th harmonics, with the three-level set {-1, 0, 1}.
The solver never sees a waveform or a switch count; both fall out of the
dual minimizer.

Run:  python3 demos/02_single_solve.py
Writes single_solve.png next to the script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from shmdual import (
    HarmonicSpec,
    SolverConfig,
    fourier_closed_form,
    minimize,
    validate_staircase,
    verify_duality,
)

spec = HarmonicSpec(
    ea=(1, 5, 7, 11, 13),
    eb=(1, 5, 7, 11, 13),
    a_target=(0.5, 0, 0, 0, 0),
    b_target=(0.5, 0, 0, 0, 0),
)
cfg = SolverConfig(epsilon=1e-5)
report = minimize(spec, cfg)

print(f"converged: {report.converged} after {report.iterations} iterations")
print(f"residual |x(pi)| = {report.residual_norm:.3e} "
      f"(bound sqrt(4 pi eps) = {np.sqrt(4 * np.pi * cfg.epsilon):.3e})")
print(f"duality check |x(pi) + eps p| scaled: {verify_duality(report, cfg):.3e}")
print(f"staircase valid: {validate_staircase(report.signal, cfg.levels).ok}")

print("\nwaveform and switching angles:")
print("  levels:", report.signal.levels)
print("  angles:", tuple(round(a, 6) for a in report.signal.angles))

a, b = fourier_closed_form(report.signal, spec)
print("\nachieved coefficients (closed form):")
for j, aj, bj in zip(spec.ea, a, b):
    print(f"  harmonic {j:2d}: a = {aj:+.6f}   b = {bj:+.6f}")

print("\nsmoothing continuation:")
for s in report.stages:
    print(f"  mu = {s.mu:.0e}: {s.iterations:4d} iterations, "
          f"gradient {s.grad_norm:.2e}, objective {s.objective:+.8f}")

fig, ax = plt.subplots(figsize=(8, 3))
grid = np.linspace(0, np.pi, len(report.u_samples))
ax.step(grid, report.u_samples, where="post", lw=1.2)
for phi in report.signal.angles:
    ax.axvline(phi, color="0.85", zorder=0)
ax.set_xlabel("t (rad)")
ax.set_ylabel("u(t)")
ax.set_title("recovered three-level staircase control, m = 0.5")
fig.tight_layout()
out = Path(__file__).with_name("single_solve.png")
fig.savefig(out, dpi=130)
print(f"\nwrote {out}")

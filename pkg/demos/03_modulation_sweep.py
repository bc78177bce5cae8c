#!/usr/bin/env python3
"""Sweep the modulation index and map every control into one picture.

Reproduces the headline experiment: fundamental targets m on both coefficient
families for m in [-0.8, 0.8], harmonics 5, 7, 11, 13 suppressed, three
levels.  Each solve warm-starts from the previous optimum; the solution map
(m, t) -> u(t) is the figure the sweep CSV is meant to feed.

A coarser grid than the library default keeps this demo quick; drop the
`grid_size` override to reproduce at full resolution.

Run:  python3 demos/03_modulation_sweep.py
Writes modulation_sweep.png next to the script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from shmdual import HarmonicSpec, LevelSet, SolverConfig, minimize

FREQS = (1, 5, 7, 11, 13)
cfg = SolverConfig(epsilon=1e-5, levels=LevelSet.uniform(3), grid_size=4000)
ms = np.linspace(-0.8, 0.8, 65)

controls = np.empty((ms.size, cfg.grid_size + 1))
switches = np.empty(ms.size, dtype=int)
p = None
for i, m in enumerate(ms):
    spec = HarmonicSpec(
        ea=FREQS, eb=FREQS,
        a_target=(m, 0, 0, 0, 0), b_target=(m, 0, 0, 0, 0),
    )
    report = minimize(spec, cfg, p0=p)
    p = report.p_opt  # warm start the neighbor
    controls[i] = report.u_samples
    switches[i] = report.signal.switch_count
    if i % 16 == 0:
        print(f"m = {m:+.3f}: residual {report.residual_norm:.2e}, "
              f"{switches[i]} switches, {report.iterations} iterations")

print(f"\nswitch counts across the sweep: min {switches.min()}, max {switches.max()}")

fig, ax = plt.subplots(figsize=(7, 5))
t = np.linspace(0, np.pi, cfg.grid_size + 1)
pcm = ax.pcolormesh(ms, t, controls.T, cmap="viridis", shading="nearest")
ax.set_xlabel("modulation index m")
ax.set_ylabel("t (rad)")
ax.set_title("staircase controls across the modulation range (top view)")
fig.colorbar(pcm, ax=ax, label="u(t)", ticks=[-1, 0, 1])
fig.tight_layout()
out = Path(__file__).with_name("modulation_sweep.png")
fig.savefig(out, dpi=130)
print(f"wrote {out}")

"""Shared test utilities."""

import numpy as np

from shmdual.dynamics import TimeGrid
from shmdual.penalty import LevelSet
from shmdual.waveform import StaircaseSignal


def random_staircase(rng, levels: LevelSet, grid: TimeGrid, max_switches=12):
    """Random valid staircase with angles at grid-cell midpoints.

    Midpoint alignment matches what extraction produces and keeps node
    sampling consistent with the symbolic signal, so trapezoid quadrature of
    the samples sees no jump inside a cell and converges at second order.
    """
    n_switch = int(rng.integers(1, max_switches + 1))
    cells = rng.choice(np.arange(1, grid.size - 1), size=n_switch, replace=False)
    cells.sort()
    angles = (grid.nodes[cells] + grid.nodes[cells + 1]) / 2.0
    values = levels.as_array()
    walk = [int(rng.integers(0, values.size))]
    for _ in range(n_switch):
        step = 1 if rng.random() < 0.5 else -1
        nxt = walk[-1] + step
        if not 0 <= nxt < values.size:
            nxt = walk[-1] - step
        walk.append(nxt)
    return StaircaseSignal(levels=tuple(values[walk]), angles=tuple(angles))

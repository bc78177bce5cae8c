"""Primal-side solvers used to cross-validate the dual method.

Two independent routes to the same optimum: projected spectral gradient
descent on the discretized control (with the penalty's kinks Moreau-smoothed,
exactly as the dual side smooths the conjugate), and exhaustive enumeration
of level assignments on a coarse cell partition.  Neither is performance
tuned; they exist so the dual solver never has to be trusted on its own
word.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dynamics import HarmonicSpec, TimeGrid, terminal_state
from .penalty import LevelSet, penalty_eval, smoothed_penalty_grad

__all__ = [
    "PrimalConfig",
    "PrimalSolution",
    "primal_objective",
    "primal_minimize",
    "enumerate_exhaustive",
    "cell_average",
    "cells_to_samples",
]

_ENUM_BUDGET = 10_000_000


@dataclass(frozen=True)
class PrimalConfig:
    """Primal cross-check parameters.

    ``step`` seeds the spectral step size; ``enum_grid`` is the number of
    equal time cells used by exhaustive enumeration, which refuses budgets
    beyond ``levels**enum_grid > 1e7`` assignments.
    """

    epsilon: float
    levels: LevelSet = field(default_factory=lambda: LevelSet.uniform(3))
    grid_size: int = 2_000
    step: float = 1.0
    max_iter: int = 2_000
    enum_grid: int = 8
    mu_schedule: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    grad_tol: float = 1e-6

    def __post_init__(self):
        if self.epsilon <= 0 or self.step <= 0 or self.grad_tol <= 0:
            raise ValueError("epsilon, step, and grad_tol must be positive")
        if self.enum_grid < 1:
            raise ValueError("enum_grid must be at least 1")


@dataclass(frozen=True)
class PrimalSolution:
    u_samples: np.ndarray
    objective: float
    converged: bool
    iterations: int


def primal_objective(u_samples, spec: HarmonicSpec, cfg: PrimalConfig) -> float:
    """Quadrature value of the penalized tracking functional.

    ``|x(pi)|^2 / (2 eps)`` plus the integral of the level penalty along the
    control.
    """
    grid = TimeGrid.uniform(cfg.grid_size)
    u = np.asarray(u_samples, dtype=float)
    x = terminal_state(u, spec, grid)
    pen = penalty_eval(u, cfg.levels)
    return float(x @ x) / (2.0 * cfg.epsilon) + float(grid.weights @ pen)


def primal_minimize(spec: HarmonicSpec, cfg: PrimalConfig) -> PrimalSolution:
    """Projected spectral gradient descent on the discretized control.

    Works in the L2 metric of the grid (gradients are functional gradients,
    not weight-scaled ones), clamps to [-1, 1] after each step, and anneals
    the penalty smoothing like the dual solver.  The reported objective uses
    the exact, unsmoothed penalty.
    """
    from .dynamics import c_matrix  # local import keeps module deps flat

    grid = TimeGrid.uniform(cfg.grid_size)
    cmat = c_matrix(spec, grid)
    w = grid.weights
    x0 = spec.x0()
    eps = cfg.epsilon

    def smoothed_value_grad(u, mu):
        x = x0 + cmat.T @ (w * u)
        pen, dpen = smoothed_penalty_grad(u, mu, cfg.levels)
        f = float(x @ x) / (2.0 * eps) + float(w @ pen)
        g = cmat @ x / eps + dpen  # functional gradient, L2 metric
        return f, g

    u = np.zeros(grid.nodes.size)
    total = 0
    converged = False
    for mu in cfg.mu_schedule:
        f, g = smoothed_value_grad(u, mu)
        alpha = cfg.step / max(1.0, float(np.linalg.norm(g)))
        history = [f]
        for _ in range(cfg.max_iter):
            u_trial = np.clip(u - alpha * g, -1.0, 1.0)
            step_vec = u_trial - u
            # projected-gradient stationarity in the weighted norm
            crit = float(np.sqrt(w @ (step_vec / alpha) ** 2))
            if crit <= cfg.grad_tol:
                converged = True
                break
            converged = False
            f_ref = max(history)
            decrease = float(w @ (g * step_vec))
            lam = 1.0
            accepted = False
            for _ in range(30):
                u_new = np.clip(u - lam * alpha * g, -1.0, 1.0)
                f_new, g_new = smoothed_value_grad(u_new, mu)
                if f_new <= f_ref + 1e-4 * lam * decrease:
                    accepted = True
                    break
                lam *= 0.5
            total += 1
            if not accepted:
                break
            s = u_new - u
            y = g_new - g
            sy = float(w @ (s * y))
            if sy > 1e-300:
                alpha = float(w @ (s * s)) / sy
            alpha = min(max(alpha, 1e-10), 1e10)
            u, f, g = u_new, f_new, g_new
            history.append(f)
            if len(history) > 10:
                history.pop(0)
    return PrimalSolution(
        u_samples=u,
        objective=primal_objective(u, spec, cfg),
        converged=converged,
        iterations=total,
    )


def _cell_integrals(spec: HarmonicSpec, enum_grid: int) -> np.ndarray:
    """Exact integral of C(t) over each of the equal cells, shape (cells, dim)."""
    edges = np.linspace(0.0, np.pi, enum_grid + 1)
    out = np.empty((enum_grid, spec.dim))
    ea = np.asarray(spec.ea, dtype=float)
    eb = np.asarray(spec.eb, dtype=float)
    for c in range(enum_grid):
        t0, t1 = edges[c], edges[c + 1]
        ca = -(2.0 / np.pi) * (np.sin(ea * t1) - np.sin(ea * t0)) / ea
        cb = (2.0 / np.pi) * (np.cos(eb * t1) - np.cos(eb * t0)) / eb
        out[c] = np.concatenate([ca, cb])
    return out


def enumerate_exhaustive(spec: HarmonicSpec, cfg: PrimalConfig):
    """Ground-truth search over every level assignment on the coarse cells.

    Evaluates the primal functional exactly (closed-form cell integrals, so
    no quadrature error) for all ``levels**enum_grid`` assignments and
    returns ``(cell_values, objective)`` for the best one.  Ties resolve to
    the lexicographically smallest assignment; the budget guard refuses runs
    beyond 1e7 assignments.
    """
    levels = cfg.levels.as_array()
    n_levels = levels.size
    total = n_levels**cfg.enum_grid
    if total > _ENUM_BUDGET:
        raise ValueError(
            f"enumeration over {n_levels}^{cfg.enum_grid} = {total} assignments "
            f"exceeds the {_ENUM_BUDGET} budget"
        )
    cell_int = _cell_integrals(spec, cfg.enum_grid)
    x0 = spec.x0()
    width = np.pi / cfg.enum_grid
    level_pen = penalty_eval(levels, cfg.levels)

    best_obj = np.inf
    best_idx = None
    chunk = 100_000
    assignments = itertools.product(range(n_levels), repeat=cfg.enum_grid)
    while True:
        block = np.array(list(itertools.islice(assignments, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        s = levels[block]
        x = x0[None, :] + s @ cell_int
        obj = np.einsum("ij,ij->i", x, x) / (2.0 * cfg.epsilon) + width * np.sum(
            level_pen[block], axis=1
        )
        k = int(np.argmin(obj))  # first occurrence: lexicographic tie-break
        if obj[k] < best_obj:
            best_obj = float(obj[k])
            best_idx = block[k].copy()
    return levels[best_idx], best_obj


def cells_to_samples(cell_values, grid_size: int) -> np.ndarray:
    """Expand a coarse cell assignment to fine-grid samples (right-open cells)."""
    cells = np.asarray(cell_values, dtype=float)
    nodes = np.linspace(0.0, np.pi, grid_size + 1)
    idx = np.minimum((nodes / (np.pi / cells.size)).astype(int), cells.size - 1)
    return cells[idx]


def cell_average(u_samples, enum_grid: int) -> np.ndarray:
    """Average a fine-grid control over each coarse cell (trapezoid weights)."""
    u = np.asarray(u_samples, dtype=float)
    grid = TimeGrid.uniform(u.size - 1)
    edges = np.linspace(0.0, np.pi, enum_grid + 1)
    out = np.empty(enum_grid)
    for c in range(enum_grid):
        mask = (grid.nodes >= edges[c]) & (grid.nodes < edges[c + 1])
        if c == enum_grid - 1:
            mask |= grid.nodes == np.pi
        out[c] = np.sum(grid.weights[mask] * u[mask]) / np.sum(grid.weights[mask])
    return out

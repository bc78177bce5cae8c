"""Dual synthesis of multilevel staircase controls.

Minimizes, over the adjoint terminal state p, the strictly convex functional

    J(p) = integral of L*(C(t)' p) dt  +  (eps/2) |p|^2  +  <x0, p>,

then recovers the control from the subdifferential of the conjugate penalty
at C(t)' p and checks the optimality relation x(pi) = -eps * p.  The adjoint
dynamics are trivial (constant p), so the whole problem is finite
dimensional with the time dependence confined to C(t).

The integrand is piecewise affine in p with kinks wherever C(t)' p crosses a
conjugate breakpoint on the grid, so the minimization runs a smoothing
continuation: each stage minimizes the objective with the conjugate replaced
by its Moreau envelope, warm-started from the previous stage.  Stages use
Barzilai-Borwein spectral steps with a nonmonotone line search for the bulk
of the progress and finish with damped Newton steps on the piecewise
quadratic envelope (the envelope's curvature is explicit: eps plus a rank-one
term per grid node currently inside a smoothing band), which reaches tight
gradient tolerances that line-search methods cannot resolve in floating
point.

Solves hold no global state; concurrent solves on independent inputs are
safe, and results are deterministic for fixed inputs (fixed-order
reductions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import waveform
from .dynamics import HarmonicSpec, TimeGrid, c_matrix, terminal_state
from .penalty import (
    ConjugateTable,
    LevelSet,
    _envelope_pieces,
    conjugate_eval,
    conjugate_subdiff,
)
from .waveform import StaircaseSignal, StaircaseViolation

__all__ = [
    "SolverConfig",
    "StageLog",
    "SolveReport",
    "dual_objective",
    "dual_gradient",
    "minimize",
    "recover_control",
    "verify_duality",
]

_DEFAULT_MU_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


@dataclass(frozen=True)
class SolverConfig:
    """Dual-solve parameters.

    ``grad_tol`` defaults to 1e-9 per state dimension, resolved when the
    spec is known.  The smoothing schedule must be strictly decreasing;
    ``max_iter`` caps the iterations of each smoothing stage.
    """

    epsilon: float
    levels: LevelSet = field(default_factory=lambda: LevelSet.uniform(3))
    grid_size: int = 20_000
    mu_schedule: tuple[float, ...] = _DEFAULT_MU_SCHEDULE
    grad_tol: float | None = None
    max_iter: int = 5000
    snap_tol: float = 1e-9
    min_dwell: float = 1e-4

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        mus = tuple(float(m) for m in self.mu_schedule)
        if not mus or any(m <= 0 for m in mus) or any(b >= a for a, b in zip(mus, mus[1:])):
            raise ValueError("mu_schedule must be a strictly decreasing list of positive reals")
        if self.grad_tol is not None and self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.snap_tol < 0 or self.min_dwell < 0:
            raise ValueError("snap_tol and min_dwell must be nonnegative")
        object.__setattr__(self, "mu_schedule", mus)

    def resolved_grad_tol(self, dim: int) -> float:
        return self.grad_tol if self.grad_tol is not None else 1e-9 * dim


@dataclass(frozen=True)
class StageLog:
    """Per-smoothing-stage record of the continuation."""

    mu: float
    iterations: int
    grad_norm: float
    objective: float


@dataclass(frozen=True)
class SolveReport:
    """Everything a solve produces, including duality diagnostics.

    ``x_terminal`` is propagated from the recovered (snapped) control;
    ``duality_gap_check`` is the norm of ``x_terminal + eps * p_opt``, which
    the optimality theory says should vanish.  ``samples_merged`` counts grid
    nodes whose value was altered by dwell merging during extraction.
    """

    p_opt: np.ndarray
    u_samples: np.ndarray
    signal: StaircaseSignal
    x_terminal: np.ndarray
    residual_norm: float
    duality_gap_check: float
    objective_value: float
    iterations: int
    converged: bool
    grad_norm: float
    stages: tuple[StageLog, ...]
    samples_merged: int


class _Workspace:
    """Precomputed grid data shared by objective/gradient evaluations."""

    def __init__(self, spec: HarmonicSpec, cfg: SolverConfig):
        self.spec = spec
        self.cfg = cfg
        self.grid = TimeGrid.uniform(cfg.grid_size)
        self.cmat = c_matrix(spec, self.grid)
        self.w = self.grid.weights
        self.x0 = spec.x0()
        self.table = ConjugateTable.from_levels(cfg.levels)
        self.eps = cfg.epsilon

    def objective(self, p: np.ndarray, mu: float) -> float:
        omega = self.cmat @ p
        if mu > 0:
            vals, _, _ = _envelope_pieces(omega, mu, self.table)
        else:
            vals = conjugate_eval(omega, self.table)
        quad = 0.5 * self.eps * float(p @ p) + float(self.x0 @ p)
        return float(self.w @ vals) + quad

    def value_grad(self, p: np.ndarray, mu: float):
        omega = self.cmat @ p
        vals, slopes, _ = _envelope_pieces(omega, mu, self.table)
        f = float(self.w @ vals) + 0.5 * self.eps * float(p @ p) + float(self.x0 @ p)
        g = self.cmat.T @ (self.w * slopes) + self.eps * p + self.x0
        return f, g

    def grad_hess(self, p: np.ndarray, mu: float):
        omega = self.cmat @ p
        _, slopes, in_kink = _envelope_pieces(omega, mu, self.table)
        g = self.cmat.T @ (self.w * slopes) + self.eps * p + self.x0
        h = self.eps * np.eye(p.size)
        idx = np.nonzero(in_kink)[0]
        if idx.size:
            ck = self.cmat[idx]
            h += ck.T @ (ck * (self.w[idx] / mu)[:, None])
        return g, h


def _bb_descent(ws: _Workspace, mu: float, p0: np.ndarray, tol: float, max_iter: int):
    """Barzilai-Borwein steps with a nonmonotone Armijo backtracking."""
    p = p0.copy()
    f, g = ws.value_grad(p, mu)
    if not np.isfinite(f):
        raise FloatingPointError("dual objective is not finite")
    gnorm = float(np.linalg.norm(g))
    history = [f]
    alpha = 1.0 / max(gnorm, 1e-12)
    iters = 0
    for _ in range(max_iter):
        if gnorm <= tol:
            break
        iters += 1
        d = -alpha * g
        slope = float(g @ d)
        f_ref = max(history)
        lam = 1.0
        accepted = False
        for _ in range(40):
            p_new = p + lam * d
            f_new, g_new = ws.value_grad(p_new, mu)
            if np.isnan(f_new):
                raise FloatingPointError("dual objective is NaN")
            if f_new <= f_ref + 1e-4 * lam * slope:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break  # progress below floating-point resolution; polish next
        s = p_new - p
        y = g_new - g
        sy = float(s @ y)
        alpha = float(s @ s) / sy if sy > 1e-300 else min(alpha * 2.0, 1e12)
        alpha = min(max(alpha, 1e-12), 1e12)
        p, f, g = p_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        history.append(f)
        if len(history) > 10:
            history.pop(0)
    return p, g, gnorm, iters


def _newton_polish(ws: _Workspace, mu: float, p: np.ndarray, tol: float, max_iter: int):
    """Damped Newton on the piecewise-quadratic smoothed objective.

    The step is accepted on gradient-norm decrease, which stays meaningful
    long after objective differences sink below machine noise.
    """
    g, h = ws.grad_hess(p, mu)
    gnorm = float(np.linalg.norm(g))
    iters = 0
    for _ in range(max_iter):
        if gnorm <= tol:
            break
        iters += 1
        try:
            d = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        improved = False
        for _ in range(30):
            p_try = p + step * d
            g_try, h_try = ws.grad_hess(p_try, mu)
            gn_try = float(np.linalg.norm(g_try))
            if gn_try < gnorm * (1.0 - 1e-4 * step):
                p, g, h, gnorm = p_try, g_try, h_try, gn_try
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return p, gnorm, iters


_BB_HANDOFF = 1e-3  # gradient norm at which Newton polishing takes over


def _stage_solve(ws: _Workspace, mu: float, p: np.ndarray, stage_tol: float, max_iter: int):
    """One smoothing stage: BB for the bulk, Newton for the endgame.

    BB steps are cheap and cover large moves, but their line search loses
    traction once objective differences approach roundoff; the explicit
    piecewise-quadratic Hessian then finishes the job.  Alternates if a
    Newton round stalls short of the stage tolerance.
    """
    iters = 0
    bb_target = max(stage_tol, _BB_HANDOFF)
    gnorm = np.inf
    for _ in range(3):
        p, _, gnorm, it_bb = _bb_descent(ws, mu, p, bb_target, max_iter - iters)
        iters += it_bb
        if gnorm <= stage_tol:
            break
        p, gnorm, it_newton = _newton_polish(ws, mu, p, stage_tol, 50)
        iters += it_newton
        if gnorm <= stage_tol or iters >= max_iter:
            break
        bb_target = max(stage_tol, bb_target / 100.0)
    return p, gnorm, iters


def dual_objective(p, spec: HarmonicSpec, cfg: SolverConfig, mu: float = 0.0) -> float:
    """The dual functional at p; ``mu > 0`` swaps in the smoothed conjugate."""
    ws = _Workspace(spec, cfg)
    return ws.objective(np.asarray(p, dtype=float), mu)


def dual_gradient(p, spec: HarmonicSpec, cfg: SolverConfig, mu: float) -> np.ndarray:
    """Gradient of the mu-smoothed dual functional.

    Equals ``x(pi; u_mu) + eps p`` where ``u_mu(t)`` is the smoothed
    subgradient selection at ``C(t)' p``; the exact functional is not
    differentiable, so ``mu`` must be positive.
    """
    if mu <= 0:
        raise ValueError("dual_gradient needs mu > 0; the exact functional is nonsmooth")
    ws = _Workspace(spec, cfg)
    _, g = ws.value_grad(np.asarray(p, dtype=float), mu)
    return g


def _recover_on_workspace(ws: _Workspace, p: np.ndarray) -> np.ndarray:
    omega = ws.cmat @ p
    table = ws.table
    lo, hi = conjugate_subdiff(omega, table)
    # a node is ambiguous when omega sits within snap_tol of a breakpoint
    j = np.searchsorted(table.breakpoints, omega)
    dist = np.full(omega.size, np.inf)
    inner = j < table.breakpoints.size
    dist[inner] = np.abs(table.breakpoints[j[inner]] - omega[inner])
    left = j > 0
    dist[left] = np.minimum(dist[left], np.abs(omega[left] - table.breakpoints[j[left] - 1]))
    ambiguous = dist <= ws.cfg.snap_tol

    u = lo.copy()
    amb_idx = np.nonzero(ambiguous)[0]
    if amb_idx.size:
        clear_idx = np.nonzero(~ambiguous)[0]
        if clear_idx.size == 0:
            # no reference sample anywhere: fall back to the interval end
            # closer to zero (deterministic; lower level on ties)
            pick = np.where(np.abs(lo) <= np.abs(hi), lo, hi)
            return pick
        pos = np.searchsorted(clear_idx, amb_idx)
        right = np.clip(pos, 0, clear_idx.size - 1)
        left_ = np.clip(pos - 1, 0, clear_idx.size - 1)
        d_right = np.abs(clear_idx[right] - amb_idx)
        d_left = np.abs(amb_idx - clear_idx[left_])
        nearest = np.where(d_left <= d_right, clear_idx[left_], clear_idx[right])
        u[amb_idx] = u[nearest]
    return u


def recover_control(p, spec: HarmonicSpec, cfg: SolverConfig) -> np.ndarray:
    """Control samples from the conjugate subdifferential at C(t)' p.

    Away from breakpoints the subdifferential is a single level; samples
    within ``snap_tol`` of a breakpoint (transition instants) copy the level
    of the nearest unambiguous neighbor.  Every returned value is a level.
    """
    ws = _Workspace(spec, cfg)
    return _recover_on_workspace(ws, np.asarray(p, dtype=float))


def minimize(spec: HarmonicSpec, cfg: SolverConfig, p0=None) -> SolveReport:
    """Minimize the dual functional and recover the staircase control.

    Runs the smoothing continuation over ``cfg.mu_schedule`` with warm
    starts (``p0`` seeds the first stage; defaults to the origin, where the
    gradient is the initial state and gives a meaningful first step).
    Convergence means the gradient norm at the final smoothing level fell
    below the resolved tolerance; non-convergence is reported, not raised.
    """
    ws = _Workspace(spec, cfg)
    n = spec.dim
    tol = cfg.resolved_grad_tol(n)
    p = np.zeros(n) if p0 is None else np.asarray(p0, dtype=float).copy()
    if p.shape != (n,):
        raise ValueError(f"warm start has shape {p.shape}, expected ({n},)")

    stages: list[StageLog] = []
    total_iters = 0
    gnorm = np.inf
    last = len(cfg.mu_schedule) - 1
    for k, mu in enumerate(cfg.mu_schedule):
        # intermediate stages only need to land near the next warm start
        stage_tol = tol if k == last else max(tol, 1e-2 * mu)
        p, gnorm, it_stage = _stage_solve(ws, mu, p, stage_tol, cfg.max_iter)
        total_iters += it_stage
        stages.append(
            StageLog(
                mu=mu,
                iterations=it_stage,
                grad_norm=gnorm,
                objective=ws.objective(p, mu),
            )
        )

    converged = bool(gnorm <= tol)
    u = _recover_on_workspace(ws, p)
    try:
        signal = waveform.extract(u, cfg.levels, cfg.min_dwell)
    except StaircaseViolation:
        # merging would have skipped a level; keep the unmerged signal so the
        # report stays inspectable (chatter shows up in the switch count)
        signal = waveform.extract(u, cfg.levels, 0.0)
    resampled = np.append(
        waveform.eval_signal(signal, ws.grid.nodes[:-1]), signal.levels[-1]
    )
    samples_merged = int(np.count_nonzero(resampled != u))

    x_term = terminal_state(u, spec, ws.grid)
    return SolveReport(
        p_opt=p,
        u_samples=u,
        signal=signal,
        x_terminal=x_term,
        residual_norm=float(np.linalg.norm(x_term)),
        duality_gap_check=float(np.linalg.norm(x_term + cfg.epsilon * p)),
        objective_value=ws.objective(p, 0.0),
        iterations=total_iters,
        converged=converged,
        grad_norm=float(gnorm),
        stages=tuple(stages),
        samples_merged=samples_merged,
    )


def verify_duality(report: SolveReport, cfg: SolverConfig) -> float:
    """Scaled check of x(pi) = -eps p at the reported solution.

    Returns ``|x_terminal + eps p| / max(1, eps |p|)``; converged solves at
    default tolerances stay below 1e-3, so larger values flag a failed or
    unconverged solve.
    """
    p = report.p_opt
    num = float(np.linalg.norm(report.x_terminal + cfg.epsilon * p))
    den = max(1.0, cfg.epsilon * float(np.linalg.norm(p)))
    return num / den

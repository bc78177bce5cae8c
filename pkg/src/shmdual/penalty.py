"""Piecewise-affine level penalty and its convex conjugate.

The penalty interpolates the parabola ``u**2`` at the admissible control
levels, so it is convex, piecewise affine, and touches the parabola exactly
at every level.  Its convex conjugate is again piecewise affine, with branch
slopes equal to the levels themselves; the subdifferential of the conjugate
is therefore a step function taking values in the level set, which is what
makes dual minimizers generate multilevel controls.

Everything here is a pure function of immutable tables and is safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LevelSet",
    "ConjugateTable",
    "penalty_eval",
    "conjugate_eval",
    "conjugate_subdiff",
    "smoothed_conjugate_grad",
    "smoothed_penalty_grad",
]

_SPACING_TOL = 1e-12


@dataclass(frozen=True)
class LevelSet:
    """Admissible control values: uniformly spaced levels from -1 to 1.

    ``levels[k+1] - levels[k] == 2/(L-1)`` for all k, with L >= 2.
    """

    levels: tuple[float, ...]

    def __post_init__(self):
        u = np.asarray(self.levels, dtype=float)
        if u.ndim != 1 or u.size < 2:
            raise ValueError("a level set needs at least two values")
        if abs(u[0] + 1.0) > _SPACING_TOL or abs(u[-1] - 1.0) > _SPACING_TOL:
            raise ValueError("levels must start at -1 and end at 1")
        gaps = np.diff(u)
        if np.any(gaps <= 0):
            raise ValueError("levels must be strictly increasing")
        if np.any(np.abs(gaps - 2.0 / (u.size - 1)) > _SPACING_TOL):
            raise ValueError("levels must be uniformly spaced")
        object.__setattr__(self, "levels", tuple(float(v) for v in u))

    @classmethod
    def uniform(cls, count: int) -> "LevelSet":
        """The L-level set -1, -1 + 2/(L-1), ..., 1."""
        if count < 2:
            raise ValueError("need at least two levels")
        gap = 2.0 / (count - 1)
        return cls(tuple(-1.0 + k * gap for k in range(count)))

    @property
    def count(self) -> int:
        return len(self.levels)

    @property
    def gap(self) -> float:
        return 2.0 / (len(self.levels) - 1)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)


@dataclass(frozen=True)
class ConjugateTable:
    """Precomputed branch data for the conjugate penalty.

    Branch k of the conjugate is the affine map ``slopes[k]*w + intercepts[k]``
    with ``slopes[k] = u_k`` and ``intercepts[k] = -u_k**2``; branch k is
    active between ``breakpoints[k-1]`` and ``breakpoints[k]`` where
    ``breakpoints[k] = u_k + u_{k+1}``.  Outside the extended endpoints
    ``omega_lo``/``omega_hi`` the first/last branch continues affinely, which
    coincides with the true conjugate on the whole real line.
    """

    slopes: np.ndarray
    intercepts: np.ndarray
    breakpoints: np.ndarray
    omega_lo: float
    omega_hi: float

    @classmethod
    def from_levels(cls, levels: LevelSet) -> "ConjugateTable":
        u = levels.as_array()
        slopes = u.copy()
        intercepts = -u * u
        breakpoints = u[:-1] + u[1:]
        for arr in (slopes, intercepts, breakpoints):
            arr.flags.writeable = False
        return cls(
            slopes=slopes,
            intercepts=intercepts,
            breakpoints=breakpoints,
            omega_lo=float(breakpoints[0] - 2.0 * levels.gap),
            omega_hi=float(breakpoints[-1] + 2.0 * levels.gap),
        )

    @property
    def branch_count(self) -> int:
        return self.slopes.size


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def penalty_eval(u, levels: LevelSet):
    """Evaluate the piecewise-affine interpolant of u**2 at the levels.

    Accepts scalars or arrays in [-1, 1]; values outside the interval raise
    ``ValueError``.  At every level the value is exactly the squared level.
    """
    arr, scalar = _as_array(u)
    if np.any(arr < -1.0) or np.any(arr > 1.0):
        raise ValueError("penalty argument outside [-1, 1]")
    nodes = levels.as_array()
    k = np.clip(np.searchsorted(nodes, arr, side="right") - 1, 0, nodes.size - 2)
    lo, hi = nodes[k], nodes[k + 1]
    out = (lo + hi) * arr - lo * hi
    return float(out) if scalar else out


def conjugate_eval(omega, table: ConjugateTable):
    """Evaluate the conjugate penalty at omega (any real, scalar or array)."""
    arr, scalar = _as_array(omega)
    k = np.searchsorted(table.breakpoints, arr, side="right")
    out = table.slopes[k] * arr + table.intercepts[k]
    return float(out) if scalar else out


def conjugate_subdiff(omega, table: ConjugateTable):
    """Subdifferential of the conjugate penalty as an interval [lo, hi].

    Strictly inside branch k both ends equal the branch slope (a level);
    exactly at a breakpoint the interval spans the two adjacent levels.
    Returns a pair of floats for scalar input, a pair of arrays otherwise.
    """
    arr, scalar = _as_array(omega)
    hi_idx = np.searchsorted(table.breakpoints, arr, side="right")
    lo_idx = np.searchsorted(table.breakpoints, arr, side="left")
    lo = table.slopes[lo_idx]
    hi = table.slopes[hi_idx]
    if scalar:
        return float(lo), float(hi)
    return lo, hi


def _envelope_pieces(omega: np.ndarray, mu: float, table: ConjugateTable):
    """Region decomposition of the Moreau envelope of the conjugate.

    The prox condition ``(omega - v)/mu in dL*(v)`` tiles the real line with
    alternating branch regions (prox slides along an affine branch) and kink
    regions (prox pinned at a breakpoint).  Takes a 1-D omega array; returns
    ``(value, grad, in_kink)`` arrays, where ``in_kink`` marks regions on
    which the envelope is quadratic with curvature ``1/mu``.
    """
    nb = table.breakpoints.size
    knots = np.empty(2 * nb)
    knots[0::2] = table.breakpoints + mu * table.slopes[:-1]
    knots[1::2] = table.breakpoints + mu * table.slopes[1:]
    region = np.searchsorted(knots, omega, side="right")
    in_kink = (region % 2) == 1
    j = region >> 1

    slope = table.slopes[j]
    value = slope * omega + table.intercepts[j] - 0.5 * mu * slope * slope
    grad = slope.copy()

    kink = np.nonzero(in_kink)[0]
    if kink.size:
        jk = j[kink]
        bp = table.breakpoints[jk]
        diff = omega[kink] - bp
        value[kink] = table.slopes[jk] * bp + table.intercepts[jk] + diff * diff / (2.0 * mu)
        grad[kink] = diff / mu
    return value, grad, in_kink


def smoothed_conjugate_grad(omega, mu: float, table: ConjugateTable):
    """Moreau envelope of the conjugate penalty and its gradient.

    The envelope ``min_v [L*(v) + (omega - v)**2 / (2 mu)]`` is computed in
    closed form by region search; its gradient is ``(omega - prox)/mu``,
    which is ``1/mu``-Lipschitz and converges to a subgradient selection of
    the conjugate as mu -> 0.
    """
    if mu <= 0:
        raise ValueError("smoothing parameter mu must be positive")
    arr, scalar = _as_array(omega)
    arr = np.atleast_1d(arr)
    value, grad, _ = _envelope_pieces(arr, mu, table)
    if scalar:
        return float(value[0]), float(grad[0])
    return value, grad


def smoothed_penalty_grad(u, mu: float, levels: LevelSet):
    """Moreau envelope of the penalty itself (primal-side smoothing).

    Same construction as :func:`smoothed_conjugate_grad` but applied to the
    penalty, whose domain is [-1, 1]: the prox saturates at the endpoints, so
    the envelope is defined for every real u.  Used by the primal
    cross-check solver; the dual path never needs it.
    """
    if mu <= 0:
        raise ValueError("smoothing parameter mu must be positive")
    arr, scalar = _as_array(u)
    arr = np.atleast_1d(arr)
    nodes = levels.as_array()
    sig = nodes[:-1] + nodes[1:]  # branch slopes of the penalty

    nb = sig.size
    knots = np.empty(2 * nb)
    knots[0::2] = nodes[:-1] + mu * sig
    knots[1::2] = nodes[1:] + mu * sig
    region = np.searchsorted(knots, arr, side="right")
    on_branch = (region % 2) == 1
    j = np.minimum(region >> 1, nb - 1)

    # default: prox pinned at node j (covers both endpoints and inner nodes)
    node = nodes[np.minimum((region + 1) >> 1, nodes.size - 1)]
    diff = arr - node
    value = node * node + diff * diff / (2.0 * mu)
    grad = diff / mu

    if np.any(on_branch):
        jb = j[on_branch]
        s = sig[jb]
        value[on_branch] = (
            s * (arr[on_branch] - mu * s)
            - nodes[jb] * nodes[jb + 1]
            + 0.5 * mu * s * s
        )
        grad[on_branch] = s
    if scalar:
        return float(value[0]), float(grad[0])
    return value, grad

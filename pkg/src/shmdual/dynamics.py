"""Harmonic dynamics on [0, pi]: state propagation and Fourier coefficients.

The Fourier coefficients of a half-wave-symmetric signal are identified with
the terminal state of the reversed integrator ``x'(t) = C(t) u(t)``, started
at the target coefficients, so a control that realizes the targets drives the
state to zero.  The column C(t) stacks the cosine block (for the a-targets)
over the sine block (for the b-targets), each scaled by -2/pi.

Closed-form piecewise integration is the authoritative Fourier evaluation;
composite-trapezoid quadrature exists for cross-checks and for the solver's
integrals, whose integrands have kinks at unknown locations (uniform
trapezoid is robust there and high-order rules gain nothing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveform import StaircaseSignal

__all__ = [
    "HarmonicSpec",
    "TimeGrid",
    "eval_C",
    "c_matrix",
    "terminal_state",
    "fourier_closed_form",
    "fourier_quadrature",
]


def _check_frequencies(freqs: tuple[int, ...], name: str) -> tuple[int, ...]:
    out = []
    for f in freqs:
        k = int(f)
        if k != f or k <= 0 or k % 2 == 0:
            raise ValueError(f"{name} frequencies must be odd positive integers, got {f}")
        out.append(k)
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate frequency in {name}")
    return tuple(out)


@dataclass(frozen=True)
class HarmonicSpec:
    """Target frequencies and Fourier-coefficient targets.

    ``ea``/``eb`` index the cosine/sine coefficients to control; the state
    dimension is ``len(ea) + len(eb)`` and the initial state stacks the
    a-targets before the b-targets.
    """

    ea: tuple[int, ...]
    eb: tuple[int, ...]
    a_target: tuple[float, ...]
    b_target: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ea", _check_frequencies(tuple(self.ea), "cosine"))
        object.__setattr__(self, "eb", _check_frequencies(tuple(self.eb), "sine"))
        object.__setattr__(self, "a_target", tuple(float(v) for v in self.a_target))
        object.__setattr__(self, "b_target", tuple(float(v) for v in self.b_target))
        if len(self.a_target) != len(self.ea) or len(self.b_target) != len(self.eb):
            raise ValueError("target length must match its frequency list")
        if len(self.ea) + len(self.eb) < 1:
            raise ValueError("need at least one controlled coefficient")

    @property
    def dim(self) -> int:
        return len(self.ea) + len(self.eb)

    def x0(self) -> np.ndarray:
        return np.concatenate(
            [np.asarray(self.a_target, dtype=float), np.asarray(self.b_target, dtype=float)]
        )


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes on [0, pi] with composite-trapezoid weights."""

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, size: int) -> "TimeGrid":
        """Grid with ``size`` cells (size + 1 nodes); weights sum to pi."""
        if size < 2:
            raise ValueError("grid needs at least two cells")
        nodes = np.linspace(0.0, np.pi, size + 1)
        h = np.pi / size
        weights = np.full(size + 1, h)
        weights[0] = weights[-1] = h / 2
        nodes.flags.writeable = False
        weights.flags.writeable = False
        return cls(nodes=nodes, weights=weights)

    @property
    def size(self) -> int:
        return self.nodes.size - 1


def eval_C(t: float, spec: HarmonicSpec) -> np.ndarray:
    """The dynamics column [-2/pi cos(e_a t); -2/pi sin(e_b t)] at one time."""
    ea = np.asarray(spec.ea, dtype=float)
    eb = np.asarray(spec.eb, dtype=float)
    return -(2.0 / np.pi) * np.concatenate([np.cos(ea * t), np.sin(eb * t)])


def c_matrix(spec: HarmonicSpec, grid: TimeGrid) -> np.ndarray:
    """C(t) evaluated at all grid nodes, shape (nodes, dim)."""
    t = grid.nodes[:, None]
    ea = np.asarray(spec.ea, dtype=float)[None, :]
    eb = np.asarray(spec.eb, dtype=float)[None, :]
    return -(2.0 / np.pi) * np.concatenate([np.cos(t * ea), np.sin(t * eb)], axis=1)


def _check_samples(u_samples, grid: TimeGrid) -> np.ndarray:
    u = np.asarray(u_samples, dtype=float)
    if u.shape != grid.nodes.shape:
        raise ValueError(f"expected {grid.nodes.size} samples, got {u.shape}")
    return u


def terminal_state(u_samples, spec: HarmonicSpec, grid: TimeGrid) -> np.ndarray:
    """x(pi) = x0 + integral of C(t) u(t), by trapezoid quadrature.

    Vanishes (up to quadrature error) when the control's Fourier
    coefficients at the controlled frequencies equal the targets.
    """
    u = _check_samples(u_samples, grid)
    return spec.x0() + c_matrix(spec, grid).T @ (grid.weights * u)


def fourier_closed_form(signal: StaircaseSignal, spec: HarmonicSpec):
    """Exact Fourier coefficients of a staircase signal at the controlled
    frequencies: piecewise integration over the dwell intervals.
    """
    s = np.asarray(signal.levels)
    phi = np.concatenate([[0.0], np.asarray(signal.angles), [np.pi]])
    a = np.empty(len(spec.ea))
    b = np.empty(len(spec.eb))
    for i, j in enumerate(spec.ea):
        a[i] = (2.0 / np.pi) * np.sum(s * (np.sin(j * phi[1:]) - np.sin(j * phi[:-1]))) / j
    for i, j in enumerate(spec.eb):
        b[i] = (2.0 / np.pi) * np.sum(s * (np.cos(j * phi[:-1]) - np.cos(j * phi[1:]))) / j
    return a, b


def fourier_quadrature(u_samples, spec: HarmonicSpec, grid: TimeGrid):
    """Trapezoid approximation of the same coefficients; cross-check only."""
    u = _check_samples(u_samples, grid)
    wu = grid.weights * u
    t = grid.nodes[:, None]
    ea = np.asarray(spec.ea, dtype=float)[None, :]
    eb = np.asarray(spec.eb, dtype=float)[None, :]
    a = (2.0 / np.pi) * (np.cos(t * ea).T @ wu)
    b = (2.0 / np.pi) * (np.sin(t * eb).T @ wu)
    return a, b

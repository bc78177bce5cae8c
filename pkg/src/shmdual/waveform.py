"""Staircase signals: symbolic waveform + switching angles on [0, pi).

Converts sampled controls into an exact piecewise-constant description and
back, and checks the staircase property (consecutive waveform values must be
adjacent in the level set, i.e. the open interval between them contains no
admissible level).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .penalty import LevelSet

__all__ = [
    "StaircaseSignal",
    "StaircaseCheck",
    "ExtractionError",
    "StaircaseViolation",
    "extract",
    "validate_staircase",
    "eval_signal",
]


class ExtractionError(ValueError):
    """A sample sits farther than half a level gap from every level."""


class StaircaseViolation(ValueError):
    """A waveform step skips a level; ``index`` is the offending step."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class StaircaseSignal:
    """Piecewise-constant signal s_m on [phi_m, phi_{m+1}) with phi_0 = 0,
    phi_{M+1} = pi.

    The constructor enforces only structural sanity (lengths and strict
    angle ordering inside (0, pi)); level-set membership and the staircase
    property are checked by :func:`validate_staircase` so that invalid
    candidates can still be represented and inspected.
    """

    levels: tuple[float, ...]
    angles: tuple[float, ...]

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("waveform needs at least one level")
        if len(self.angles) != len(self.levels) - 1:
            raise ValueError("need exactly one switching angle per level change")
        phi = np.asarray(self.angles, dtype=float)
        if phi.size:
            bounds = np.concatenate([[0.0], phi, [np.pi]])
            if np.any(np.diff(bounds) <= 0):
                raise ValueError("switching angles must be strictly increasing in (0, pi)")
        object.__setattr__(self, "levels", tuple(float(s) for s in self.levels))
        object.__setattr__(self, "angles", tuple(float(a) for a in phi))

    @property
    def switch_count(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class StaircaseCheck:
    """Validation result; ``index`` locates the first offending step."""

    ok: bool
    index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def eval_signal(signal: StaircaseSignal, t):
    """Evaluate the signal at t in [0, pi); right-open interval convention."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr < 0.0) or np.any(arr >= np.pi):
        raise ValueError("signal is defined on [0, pi)")
    idx = np.searchsorted(np.asarray(signal.angles), arr, side="right")
    out = np.asarray(signal.levels)[idx]
    return float(out) if scalar else out


def validate_staircase(signal: StaircaseSignal, levels: LevelSet) -> StaircaseCheck:
    """Check signal invariants against a level set.

    Verifies level membership, no repeated consecutive level, and the
    staircase property: the open interval between consecutive levels must
    contain no admissible value.  For the bi-level set {-1, 1} every
    alternating waveform passes.
    """
    grid = levels.as_array()
    tol = 1e-9 * levels.gap
    s = np.asarray(signal.levels)
    dist = np.min(np.abs(s[:, None] - grid[None, :]), axis=1)
    bad = np.nonzero(dist > tol)[0]
    if bad.size:
        return StaircaseCheck(False, int(bad[0]), "level not in the admissible set")
    for m in range(s.size - 1):
        if s[m] == s[m + 1]:
            return StaircaseCheck(False, m, "consecutive equal levels")
        lo, hi = min(s[m], s[m + 1]), max(s[m], s[m + 1])
        inside = np.count_nonzero((grid > lo + tol) & (grid < hi - tol))
        if inside:
            return StaircaseCheck(False, m, "step skips an intermediate level")
    return StaircaseCheck(True)


def _snap(u_samples: np.ndarray, levels: LevelSet) -> np.ndarray:
    grid = levels.as_array()
    idx = np.argmin(np.abs(u_samples[:, None] - grid[None, :]), axis=1)
    dist = np.abs(u_samples - grid[idx])
    bad = np.nonzero(dist > levels.gap / 2)[0]
    if bad.size:
        raise ExtractionError(
            f"sample {bad[0]} (value {u_samples[bad[0]]:.6g}) is farther than half a "
            "level gap from every admissible level"
        )
    return grid[idx]


def _merge_short_dwells(runs: list[list[float]], min_dwell: float) -> list[list[float]]:
    """Remove dwell intervals shorter than min_dwell.

    Each run is [level, start, end].  A short run between equal neighbors is
    deleted and the neighbors fused; otherwise it is absorbed into the
    temporally longer neighbor (its only neighbor at the boundary).
    """
    runs = [list(r) for r in runs]
    while len(runs) > 1:
        lengths = [r[2] - r[1] for r in runs]
        short = [i for i, ell in enumerate(lengths) if ell < min_dwell]
        if not short:
            break
        i = min(short, key=lambda k: lengths[k])
        left = runs[i - 1] if i > 0 else None
        right = runs[i + 1] if i + 1 < len(runs) else None
        if left is not None and right is not None and left[0] == right[0]:
            left[2] = right[2]
            del runs[i : i + 2]
        elif left is None or (right is not None and right[2] - right[1] > left[2] - left[1]):
            right[1] = runs[i][1]
            del runs[i]
        else:
            left[2] = runs[i][2]
            del runs[i]
    return runs


def extract(u_samples, levels: LevelSet, min_dwell: float = 1e-4) -> StaircaseSignal:
    """Convert uniformly sampled controls on [0, pi] into a staircase signal.

    Samples are snapped to the nearest level; each switching angle is placed
    midway between the last sample of one level and the first sample of the
    next.  Dwell intervals shorter than ``min_dwell`` (radians) are merged
    into a neighbor, after which the staircase property is re-validated;
    sub-resolution chatter near conjugate breakpoints is a discretization
    artifact, not a feature of the continuous optimum.

    Raises :class:`ExtractionError` for samples off the level grid and
    :class:`StaircaseViolation` if merging produces a level skip.
    """
    u = np.asarray(u_samples, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ValueError("need a 1-D vector of at least two samples")
    snapped = _snap(u, levels)
    nodes = np.linspace(0.0, np.pi, u.size)

    change = np.nonzero(np.diff(snapped))[0]  # switch between node i and i+1
    starts = np.concatenate([[0.0], (nodes[change] + nodes[change + 1]) / 2.0])
    ends = np.concatenate([starts[1:], [np.pi]])
    run_levels = snapped[np.concatenate([[0], change + 1])]
    runs = [[float(s), float(a), float(b)] for s, a, b in zip(run_levels, starts, ends)]

    merged = False
    if min_dwell > 0:
        merged_runs = _merge_short_dwells(runs, min_dwell)
        merged = len(merged_runs) != len(runs)
        runs = merged_runs

    signal = StaircaseSignal(
        levels=tuple(r[0] for r in runs),
        angles=tuple(r[1] for r in runs[1:]),
    )
    if merged:
        check = validate_staircase(signal, levels)
        if not check:
            raise StaircaseViolation(
                f"dwell merging produced an invalid staircase at step {check.index}: "
                f"{check.reason}",
                index=int(check.index if check.index is not None else -1),
            )
    return signal

"""Multilevel staircase control synthesis via convex duality.

Computes switching signals whose prescribed odd Fourier coefficients hit
given targets, using only values from a finite level set.  The control is
obtained by minimizing a small strictly convex dual functional built from
the convex conjugate of a piecewise-affine level penalty; the conjugate's
subdifferential hands back the waveform and switching angles without fixing
either in advance.

Typical use::

    import shmdual

    spec = shmdual.HarmonicSpec(
        ea=(1, 5, 7, 11, 13), eb=(1, 5, 7, 11, 13),
        a_target=(0.5, 0, 0, 0, 0), b_target=(0.5, 0, 0, 0, 0),
    )
    report = shmdual.minimize(spec, shmdual.SolverConfig(epsilon=1e-5))
    print(report.signal.levels, report.signal.angles)
"""

from .dual_solver import (
    SolveReport,
    SolverConfig,
    StageLog,
    dual_gradient,
    dual_objective,
    minimize,
    recover_control,
    verify_duality,
)
from .dynamics import (
    HarmonicSpec,
    TimeGrid,
    c_matrix,
    eval_C,
    fourier_closed_form,
    fourier_quadrature,
    terminal_state,
)
from .penalty import (
    ConjugateTable,
    LevelSet,
    conjugate_eval,
    conjugate_subdiff,
    penalty_eval,
    smoothed_conjugate_grad,
    smoothed_penalty_grad,
)
from .primal_oracle import (
    PrimalConfig,
    PrimalSolution,
    cell_average,
    cells_to_samples,
    enumerate_exhaustive,
    primal_minimize,
    primal_objective,
)
from .waveform import (
    ExtractionError,
    StaircaseCheck,
    StaircaseSignal,
    StaircaseViolation,
    eval_signal,
    extract,
    validate_staircase,
)

__version__ = "0.1.0"

__all__ = [
    "ConjugateTable",
    "ExtractionError",
    "HarmonicSpec",
    "LevelSet",
    "PrimalConfig",
    "PrimalSolution",
    "SolveReport",
    "SolverConfig",
    "StageLog",
    "StaircaseCheck",
    "StaircaseSignal",
    "StaircaseViolation",
    "TimeGrid",
    "c_matrix",
    "cell_average",
    "cells_to_samples",
    "conjugate_eval",
    "conjugate_subdiff",
    "dual_gradient",
    "dual_objective",
    "enumerate_exhaustive",
    "eval_C",
    "eval_signal",
    "extract",
    "fourier_closed_form",
    "fourier_quadrature",
    "minimize",
    "penalty_eval",
    "primal_minimize",
    "primal_objective",
    "recover_control",
    "smoothed_conjugate_grad",
    "smoothed_penalty_grad",
    "terminal_state",
    "validate_staircase",
    "verify_duality",
]

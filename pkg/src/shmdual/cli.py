"""Command-line front end: single solves and modulation-index sweeps.

Configuration comes from an optional flat key=value file plus command-line
flags; flags win.  Single solves write a JSON document, sweeps write a
long-format CSV of the sampled controls plus a per-index summary CSV (see
docs/result_schema.json and the README for the formats).  Output files are
deterministic: identical configuration produces byte-identical files.

Exit codes: 0 when every solve converged, passed the staircase check, and
met the residual bound; 1 when any solve failed one of those (the result
file doubles as the diagnostic); 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .dual_solver import SolverConfig, SolveReport, minimize, verify_duality
from .dynamics import HarmonicSpec, fourier_closed_form
from .penalty import LevelSet
from .waveform import validate_staircase

__all__ = ["RunConfig", "cmd_solve", "cmd_sweep", "main"]

GRID_ENV_VAR = "SHMDUAL_GRID"
_DEFAULT_FREQS = (1, 5, 7, 11, 13)


class ConfigError(ValueError):
    """Invalid configuration file or flag combination."""


@dataclass
class RunConfig:
    """Resolved configuration for one CLI invocation."""

    freq_a: tuple[int, ...] = _DEFAULT_FREQS
    freq_b: tuple[int, ...] = _DEFAULT_FREQS
    target_a: tuple[float, ...] | None = None
    target_b: tuple[float, ...] | None = None
    eps: float = 1e-5
    grid: int = 20_000
    levels: tuple[float, ...] = (-1.0, 0.0, 1.0)
    mu_schedule: tuple[float, ...] = SolverConfig.__dataclass_fields__["mu_schedule"].default
    grad_tol: float | None = None
    max_iter: int = 5000
    snap_tol: float = 1e-9
    min_dwell: float = 1e-4
    m_min: float = -0.8
    m_max: float = 0.8
    m_steps: int = 33
    warm_start: bool = True
    out: str | None = None
    format: str = "json"

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            epsilon=self.eps,
            levels=LevelSet(self.levels),
            grid_size=self.grid,
            mu_schedule=self.mu_schedule,
            grad_tol=self.grad_tol,
            max_iter=self.max_iter,
            snap_tol=self.snap_tol,
            min_dwell=self.min_dwell,
        )

    def harmonic_spec(self) -> HarmonicSpec:
        ta = self.target_a if self.target_a is not None else (0.0,) * len(self.freq_a)
        tb = self.target_b if self.target_b is not None else (0.0,) * len(self.freq_b)
        return HarmonicSpec(ea=self.freq_a, eb=self.freq_b, a_target=ta, b_target=tb)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as err:
        raise ConfigError(f"expected comma-separated reals, got {text!r}") from err


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip() != "")
    except ValueError as err:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from err


_FIELD_PARSERS = {
    "freq_a": _parse_ints,
    "freq_b": _parse_ints,
    "target_a": _parse_floats,
    "target_b": _parse_floats,
    "eps": float,
    "grid": int,
    "levels": _parse_floats,
    "mu_schedule": _parse_floats,
    "grad_tol": float,
    "max_iter": int,
    "snap_tol": float,
    "min_dwell": float,
    "m_min": float,
    "m_max": float,
    "m_steps": int,
    "warm_start": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "out": str,
    "format": str,
}


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in _FIELD_PARSERS:
                    raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
                try:
                    values[key] = _FIELD_PARSERS[key](value)
                except (ValueError, ConfigError) as err:
                    raise ConfigError(f"{path}:{line_no}: {err}") from err
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    return values


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if os.environ.get(GRID_ENV_VAR):
        try:
            cfg.grid = int(os.environ[GRID_ENV_VAR])
        except ValueError as err:
            raise ConfigError(f"{GRID_ENV_VAR} must be an integer") from err
    if getattr(args, "config", None):
        for key, value in _read_config_file(args.config).items():
            setattr(cfg, key, value)
    for key in _FIELD_PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, flag)
    if getattr(args, "no_warm_start", False):
        cfg.warm_start = False
    return cfg


def _json_ready(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    return value


def _report_document(cfg: RunConfig, spec: HarmonicSpec, report: SolveReport) -> dict:
    solver = cfg.solver_config()
    bound = float(np.sqrt(4.0 * np.pi * cfg.eps))
    staircase = validate_staircase(report.signal, solver.levels)
    a, b = fourier_closed_form(report.signal, spec)
    ok = bool(report.converged and staircase.ok and report.residual_norm <= bound)
    doc = {
        "kind": "shmdual-solve-result",
        "version": 1,
        "config": {
            "epsilon": cfg.eps,
            "grid_size": cfg.grid,
            "levels": list(cfg.levels),
            "freq_a": list(spec.ea),
            "freq_b": list(spec.eb),
            "target_a": list(spec.a_target),
            "target_b": list(spec.b_target),
            "mu_schedule": list(cfg.mu_schedule),
            "grad_tol": solver.resolved_grad_tol(spec.dim),
            "max_iter": cfg.max_iter,
            "snap_tol": cfg.snap_tol,
            "min_dwell": cfg.min_dwell,
        },
        "converged": bool(report.converged),
        "staircase_valid": bool(staircase.ok),
        "residual_norm": report.residual_norm,
        "residual_bound": bound,
        "duality_gap_check": report.duality_gap_check,
        "duality_check_scaled": verify_duality(report, solver),
        "objective_value": report.objective_value,
        "iterations": report.iterations,
        "grad_norm": report.grad_norm,
        "samples_merged": report.samples_merged,
        "p_opt": report.p_opt,
        "x_terminal": report.x_terminal,
        "signal": {"levels": list(report.signal.levels), "angles": list(report.signal.angles)},
        "achieved": {"a": a, "b": b},
        "stages": [
            {
                "mu": s.mu,
                "iterations": s.iterations,
                "grad_norm": s.grad_norm,
                "objective": s.objective,
            }
            for s in report.stages
        ],
        "ok": ok,
    }
    return _json_ready(doc)


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_samples_csv(path: str, grid_nodes: np.ndarray, u: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,u\n")
        for t, v in zip(grid_nodes.tolist(), u.tolist()):
            fh.write(f"{t!r},{v!r}\n")


def cmd_solve(cfg: RunConfig) -> int:
    """Run one dual solve and write the result document."""
    if cfg.out is None:
        cfg.out = "result.csv" if cfg.format == "csv" else "result.json"
    spec = cfg.harmonic_spec()
    solver = cfg.solver_config()
    report = minimize(spec, solver)
    doc = _report_document(cfg, spec, report)
    if cfg.format == "csv":
        nodes = np.linspace(0.0, np.pi, cfg.grid + 1)
        _write_samples_csv(cfg.out, nodes, report.u_samples)
    else:
        _write_json(cfg.out, doc)
    status = "ok" if doc["ok"] else "FAILED"
    print(
        f"solve: {status} converged={doc['converged']} "
        f"residual={doc['residual_norm']:.3e} (bound {doc['residual_bound']:.3e}) "
        f"duality={doc['duality_check_scaled']:.3e} switches={len(doc['signal']['angles'])} "
        f"-> {cfg.out}"
    )
    return 0 if doc["ok"] else 1


def _summary_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_summary{ext or '.csv'}"


_SUMMARY_COLUMNS = (
    "m",
    "converged",
    "staircase_valid",
    "residual_norm",
    "residual_bound",
    "duality_gap_check",
    "duality_check_scaled",
    "objective_value",
    "iterations",
    "switches",
    "samples_merged",
    "ok",
)


def cmd_sweep(cfg: RunConfig) -> int:
    """Sweep the modulation index, warm-starting each solve from the last.

    For each m the targets are (m, 0, ..., 0) on both the cosine and sine
    frequency lists.  Writes the long-format control table (m, t, u) to
    ``cfg.out`` and the per-m summary next to it.
    """
    if cfg.out is None:
        cfg.out = "sweep.csv"
    if cfg.m_min > cfg.m_max:
        raise ConfigError("m_min must not exceed m_max")
    if cfg.m_steps < 1:
        raise ConfigError("m_steps must be at least 1")
    solver = cfg.solver_config()
    nodes = np.linspace(0.0, np.pi, cfg.grid + 1)
    ms = np.linspace(cfg.m_min, cfg.m_max, cfg.m_steps)

    all_ok = True
    p_warm = None
    rows = []
    with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("m,t,u\n")
        for m in ms:
            spec = HarmonicSpec(
                ea=cfg.freq_a,
                eb=cfg.freq_b,
                a_target=(m,) + (0.0,) * (len(cfg.freq_a) - 1) if cfg.freq_a else (),
                b_target=(m,) + (0.0,) * (len(cfg.freq_b) - 1) if cfg.freq_b else (),
            )
            report = minimize(spec, solver, p0=p_warm)
            if cfg.warm_start:
                p_warm = report.p_opt
            doc = _report_document(cfg, spec, report)
            all_ok = all_ok and doc["ok"]
            m_repr = repr(float(m))
            for t, v in zip(nodes.tolist(), report.u_samples.tolist()):
                fh.write(f"{m_repr},{t!r},{v!r}\n")
            rows.append(
                {
                    "m": float(m),
                    "converged": doc["converged"],
                    "staircase_valid": doc["staircase_valid"],
                    "residual_norm": doc["residual_norm"],
                    "residual_bound": doc["residual_bound"],
                    "duality_gap_check": doc["duality_gap_check"],
                    "duality_check_scaled": doc["duality_check_scaled"],
                    "objective_value": doc["objective_value"],
                    "iterations": doc["iterations"],
                    "switches": len(doc["signal"]["angles"]),
                    "samples_merged": doc["samples_merged"],
                    "ok": doc["ok"],
                }
            )
            print(
                f"m={m:+.4f}: {'ok' if doc['ok'] else 'FAILED'} "
                f"residual={doc['residual_norm']:.3e} iters={doc['iterations']}"
            )

    with open(_summary_path(cfg.out), "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(_SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    repr(row[c]) if isinstance(row[c], float) else str(row[c])
                    for c in _SUMMARY_COLUMNS
                )
                + "\n"
            )
    print(f"sweep: {'ok' if all_ok else 'FAILED'} -> {cfg.out}, {_summary_path(cfg.out)}")
    return 0 if all_ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shmdual",
        description="Multilevel staircase control synthesis via dual optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value config file; flags override it")
        p.add_argument("--eps", type=float, help="penalization epsilon (default 1e-5)")
        p.add_argument(
            "--grid", type=int, help=f"quadrature cells (default 20000, env {GRID_ENV_VAR})"
        )
        p.add_argument(
            "--levels",
            type=_parse_floats,
            help="admissible levels, e.g. --levels=-1,0,1 (use '=' with a leading minus)",
        )
        p.add_argument("--freq-a", dest="freq_a", type=_parse_ints, help="cosine frequencies")
        p.add_argument("--freq-b", dest="freq_b", type=_parse_ints, help="sine frequencies")
        p.add_argument(
            "--mu-schedule", dest="mu_schedule", type=_parse_floats, help="smoothing schedule"
        )
        p.add_argument("--grad-tol", dest="grad_tol", type=float, help="gradient tolerance")
        p.add_argument("--max-iter", dest="max_iter", type=int, help="iterations per stage")
        p.add_argument("--snap-tol", dest="snap_tol", type=float, help="breakpoint snap width")
        p.add_argument("--min-dwell", dest="min_dwell", type=float, help="dwell merge width")
        p.add_argument("--out", help="output path")

    p_solve = sub.add_parser("solve", help="solve one harmonic-target instance")
    add_common(p_solve)
    p_solve.add_argument(
        "--target-a", dest="target_a", type=_parse_floats, help="cosine coefficient targets"
    )
    p_solve.add_argument(
        "--target-b", dest="target_b", type=_parse_floats, help="sine coefficient targets"
    )
    p_solve.add_argument(
        "--format", choices=("json", "csv"), help="result format (default json)"
    )

    p_sweep = sub.add_parser("sweep", help="sweep the modulation index")
    add_common(p_sweep)
    p_sweep.add_argument("--m-min", dest="m_min", type=float, help="sweep start")
    p_sweep.add_argument("--m-max", dest="m_max", type=float, help="sweep end")
    p_sweep.add_argument("--m-steps", dest="m_steps", type=int, help="number of sweep points")
    p_sweep.add_argument(
        "--no-warm-start",
        dest="no_warm_start",
        action="store_true",
        help="start every solve from the origin instead of the previous optimum",
    )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.command == "sweep":
            if cfg.out is None:
                cfg.out = "sweep.csv"
            return cmd_sweep(cfg)
        if cfg.out is None:
            cfg.out = "result.csv" if cfg.format == "csv" else "result.json"
        return cmd_solve(cfg)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

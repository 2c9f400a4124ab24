"""Command-line front end.

    qpronto --preset qubit_pi_pulse --out runs/qubit
    qpronto --config problem.json --out runs/p --tol 1e-3 --grid 2000

Writes ``iterations.csv`` (streamed, one row per outer iteration),
``trajectory.csv``, ``report.json`` and ``effective_config.json`` into the
output directory. Exit codes: 0 converged, 2 iteration budget exhausted,
3 line search stalled, 4 invalid configuration, 5 numerical failure.
"""

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, describe, load_config, load_preset, preset_names
from .embedding import extract_state
from .model import infidelity
from .projection import total_cost
from .solver import Termination, solve

EXIT_CODES = {
    Termination.CONVERGED: 0,
    Termination.MAX_ITERS: 2,
    Termination.LINE_SEARCH_STALLED: 3,
    Termination.NUMERICAL_FAILURE: 5,
}
EXIT_CONFIG_ERROR = 4

ITERATION_COLUMNS = ["index", "cost", "Dg", "gamma", "step_kind", "backtracks", "infidelity"]


def trajectory_columns(n, m):
    return (
        ["t"]
        + [f"u{j + 1}" for j in range(m)]
        + [f"P{i}" for i in range(n)]
        + [f"re{i}" for i in range(n)]
        + [f"im{i}" for i in range(n)]
    )


@dataclass
class RunOutputs:
    iterations: Path
    trajectory: Path
    report: Path
    effective_config: Path
    solve_report: object = None

    @property
    def exit_code(self):
        return EXIT_CODES[self.solve_report.termination]


def _fmt(value):
    return repr(float(value))


class _AtomicWriter:
    """Text file written under a temporary name and renamed on commit."""

    def __init__(self, path):
        self.path = Path(path)
        fd, self._tmp = tempfile.mkstemp(dir=self.path.parent, prefix=f".{self.path.name}.")
        self.handle = os.fdopen(fd, "w", newline="")

    def commit(self):
        self.handle.close()
        os.replace(self._tmp, self.path)

    def abort(self):
        self.handle.close()
        if os.path.exists(self._tmp):
            os.unlink(self._tmp)


def _write_atomic(path, text):
    w = _AtomicWriter(path)
    try:
        w.handle.write(text)
    except BaseException:
        w.abort()
        raise
    w.commit()


def run(config, output_dir):
    """Solve ``config`` and write all result files into ``output_dir``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = RunOutputs(
        iterations=out / "iterations.csv",
        trajectory=out / "trajectory.csv",
        report=out / "report.json",
        effective_config=out / "effective_config.json",
    )
    _write_atomic(paths.effective_config, json.dumps(config.raw, indent=2) + "\n")

    spec = config.cost()
    writer = _AtomicWriter(paths.iterations)
    rows = csv.writer(writer.handle, lineterminator="\n")
    rows.writerow(ITERATION_COLUMNS)

    def observer(rec):
        rows.writerow(
            [rec.index, _fmt(rec.cost), _fmt(rec.Dg), _fmt(rec.gamma),
             rec.step_kind.value, rec.backtracks, _fmt(rec.infidelity)]
        )
        writer.handle.flush()

    started = time.perf_counter()
    try:
        report = solve(
            config.system, spec, config.x0, config.initial_guess(),
            config.solver_config(), observer=observer,
        )
    except BaseException:
        writer.abort()
        raise
    wall = time.perf_counter() - started
    writer.commit()

    xi = report.final
    n, m = config.n, config.m
    lines = [",".join(trajectory_columns(n, m))]
    for t, x, u in zip(xi.grid.times, xi.x.values, xi.u.values):
        psi = extract_state(x)
        fields = [t, *u, *np.abs(psi) ** 2, *psi.real, *psi.imag]
        lines.append(",".join(_fmt(v) for v in fields))
    _write_atomic(paths.trajectory, "\n".join(lines) + "\n")

    summary = {
        "problem": config.name,
        "termination": report.termination.value,
        "converged": report.converged,
        "steps": report.steps,
        "iterations": len(report.iterations),
        "final_cost": total_cost(spec, xi),
        "final_infidelity": infidelity(spec, xi.final_state),
        "final_Dg": report.iterations[-1].Dg if report.iterations else None,
        "riccati_failures": report.riccati_failures,
        "max_abs_control": float(np.max(np.abs(xi.u.values))),
        "wall_time_s": wall,
    }
    _write_atomic(paths.report, json.dumps(summary, indent=2) + "\n")
    paths.solve_report = report
    return paths


def build_parser():
    p = argparse.ArgumentParser(
        prog="qpronto",
        description="Projection-operator Newton solver for quantum state transfer.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="JSON problem description")
    src.add_argument("--preset", metavar="NAME", help=f"built-in problem ({', '.join(preset_names())})")
    p.add_argument("--out", metavar="DIR", help="output directory (required unless --describe)")
    p.add_argument("--tol", type=float, help="override the exit threshold on -Dg")
    p.add_argument("--grid", type=int, help="override the number of grid steps N")
    p.add_argument("--describe", action="store_true", help="print a problem summary and exit")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_preset(args.preset) if args.preset else load_config(args.config)
        if args.tol is not None or args.grid is not None:
            config = config.with_overrides(tol=args.tol, grid=args.grid)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    if args.describe:
        print(describe(config))
        return 0
    if not args.out:
        print("config error: --out is required", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    outputs = run(config, args.out)
    report = outputs.solve_report
    if not args.quiet:
        print(
            f"{report.termination.value}: {report.steps} steps, "
            f"cost {report.final_cost:.6g}, results in {args.out}"
        )
    return outputs.exit_code


if __name__ == "__main__":
    sys.exit(main())

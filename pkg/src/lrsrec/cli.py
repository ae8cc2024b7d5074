"""Command-line interface.

Subcommands:
    solve   one instance (synthetic, or a user matrix via --input), trace CSV
    trace   convergence experiment: per-iteration traces over many trials
    phase   phase-transition sweep: success fraction vs. sample size
    rate    statistical-rate sweep: mean squared error vs. sample size

Settings come from (lowest to highest precedence) built-in defaults, an INI
config file (--config, sections [experiment], [solver], [init]), and flags.
The default output directory is $LRSREC_OUTDIR or the current directory.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import LrsError, ParameterError
from .experiments import (
    ExperimentSpec,
    run_convergence,
    run_phase_transition,
    run_single,
    run_stat_rate,
)

OUTDIR_ENV = "LRSREC_OUTDIR"

_KIND_BY_COMMAND = {
    "solve": "single",
    "trace": "convergence",
    "phase": "phase_transition",
    "rate": "stat_rate",
}

# (flag/config key, spec field, type) for the [experiment] section.
_EXPERIMENT_FIELDS = (
    ("model", "model", str),
    ("d1", "d1", int),
    ("d2", "d2", int),
    ("r", "r", int),
    ("beta", "beta", float),
    ("amplitude", "amplitude", float),
    ("s_count", "s_count", int),
    ("n", "n", int),
    ("p", "p", float),
    ("trials", "trials", int),
    ("noise", "noise_nu", float),
    ("seed", "master_seed", int),
    ("threads", "threads", int),
)

_SOLVER_FIELDS = (
    ("alpha", float),
    ("gamma", float),
    ("gamma_prime", float),
    ("eta_coeff", float),
    ("tau", float),
    ("max_iters", int),
    ("tol", float),
)

_INIT_FIELDS = (
    ("lam", float),
    ("lam_prime", float),
    ("eta_prime", float),
    ("tau_prime", float),
    ("init_iters", int),
    ("zeta_coeff", float),
    ("kappa_hint", float),
)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.replace(";", ",").split(",") if tok.strip())
    except ValueError as exc:
        raise ParameterError(f"grid must be a comma-separated list of numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrsrec",
        description="Low-rank plus sparse matrix recovery experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, help_text in (
        ("solve", "solve one instance and write its trace"),
        ("trace", "convergence traces over repeated trials"),
        ("phase", "phase-transition sweep (noiseless)"),
        ("rate", "statistical-rate sweep"),
    ):
        p = sub.add_parser(command, help=help_text)
        p.add_argument("--config", type=Path, help="INI config file; flags override it")
        p.add_argument("--out", type=Path, help=f"output directory (default ${OUTDIR_ENV} or .)")
        p.add_argument("--model", choices=("sensing", "rpca_full", "rpca_partial"))
        p.add_argument("--d1", type=int, help="rows of the planted matrix")
        p.add_argument("--d2", type=int, help="columns of the planted matrix")
        p.add_argument("--r", type=int, help="planted / target rank")
        p.add_argument("--beta", type=float, help="per-row/column corruption fraction")
        p.add_argument("--amplitude", type=float, help="corruption value range half-width (default r)")
        p.add_argument("--s-count", dest="s_count", type=int, help="sparsity budget (default nnz of planted S)")
        p.add_argument("--n", type=int, help="sensing measurement count")
        p.add_argument("--p", type=float, help="observed fraction for rpca_partial")
        p.add_argument("--grid", type=str, help="comma-separated sweep values (n or p)")
        p.add_argument("--trials", type=int, help="trials per grid point")
        p.add_argument("--noise", type=float, help="noise level nu")
        p.add_argument("--seed", type=int, help="master seed (default 42)")
        p.add_argument("--threads", type=int, help="worker threads across trials")
        p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None,
                       help="render figures next to the CSVs (default on)")
        p.add_argument("--timing", action="store_true", default=None,
                       help="write wall-clock secs into trace CSVs (breaks byte-identical reruns)")
        p.add_argument("--input", type=Path, help="pre-formed data matrix for an rpca solve")
        p.add_argument("--save-solution", dest="save_solution", action="store_true", default=None,
                       help="write recovered x_hat/s_hat matrices (solve only)")
        for name, typ in _SOLVER_FIELDS:
            p.add_argument(f"--{name.replace('_', '-')}", dest=f"solver_{name}", type=typ)
        for name, typ in _INIT_FIELDS:
            p.add_argument(f"--{name.replace('_', '-')}", dest=f"init_{name}", type=typ)
    return parser


def _load_config(path: Path) -> tuple[dict, dict, dict]:
    if not path.exists():
        raise ParameterError(f"config file not found: {path}")
    ini = configparser.ConfigParser()
    ini.read(path)
    experiment: dict = {}
    solver: dict = {}
    init: dict = {}
    types_by_key = {key: typ for key, _, typ in _EXPERIMENT_FIELDS}
    fields_by_key = {key: field for key, field, _ in _EXPERIMENT_FIELDS}
    if ini.has_section("experiment"):
        for key, raw in ini.items("experiment"):
            if key == "grid":
                experiment["grid"] = _parse_grid(raw)
            elif key in ("plot", "timing", "save_solution"):
                experiment[key] = ini.getboolean("experiment", key)
            elif key in ("out", "input"):
                experiment[{"out": "out_dir", "input": "input_matrix"}[key]] = Path(raw)
            elif key in types_by_key:
                experiment[fields_by_key[key]] = types_by_key[key](raw)
            else:
                raise ParameterError(f"unknown config key [experiment] {key}")
    for section, sink, known in (("solver", solver, _SOLVER_FIELDS), ("init", init, _INIT_FIELDS)):
        if ini.has_section(section):
            names = {name: typ for name, typ in known}
            for key, raw in ini.items(section):
                if key not in names:
                    raise ParameterError(f"unknown config key [{section}] {key}")
                sink[key] = names[key](raw)
    return experiment, solver, init


def _build_spec(args: argparse.Namespace) -> ExperimentSpec:
    experiment: dict = {}
    solver: dict = {}
    init: dict = {}
    if args.config is not None:
        experiment, solver, init = _load_config(args.config)

    for key, field, _ in _EXPERIMENT_FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            experiment[field] = val
    if args.grid is not None:
        experiment["grid"] = _parse_grid(args.grid)
    if args.out is not None:
        experiment["out_dir"] = args.out
    elif "out_dir" not in experiment:
        experiment["out_dir"] = Path(os.environ.get(OUTDIR_ENV, "."))
    if args.plot is not None:
        experiment["plot"] = args.plot
    if args.timing is not None:
        experiment["timing"] = args.timing
    if args.input is not None:
        experiment["input_matrix"] = args.input
    if args.save_solution is not None:
        experiment["save_solution"] = args.save_solution

    for name, _ in _SOLVER_FIELDS:
        val = getattr(args, f"solver_{name}")
        if val is not None:
            solver[name] = val
    for name, _ in _INIT_FIELDS:
        val = getattr(args, f"init_{name}")
        if val is not None:
            init[name] = val

    experiment["kind"] = _KIND_BY_COMMAND[args.command]
    experiment["solver"] = solver
    experiment["init"] = init
    spec = ExperimentSpec(**experiment)
    spec.validate()
    return spec


def _format_summary(summary: dict) -> str:
    parts = []
    for key in ("rel_err_x", "rel_err_s", "rmse", "objective", "iterations", "secs"):
        if key in summary and summary[key] is not None:
            val = summary[key]
            parts.append(f"{key}={val:.6g}" if isinstance(val, float) else f"{key}={val}")
    for key in ("trace_csv", "csv", "figure"):
        if key in summary:
            parts.append(f"{key}={summary[key]}")
    return " ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _build_spec(args)
        if args.command == "solve":
            summary = run_single(spec)
            print(_format_summary(summary))
        elif args.command == "trace":
            summary = run_convergence(spec)
            print(_format_summary(summary))
        elif args.command == "phase":
            result = run_phase_transition(spec)
            for gval, frac in zip(result["grid"], result["success_fraction"]):
                print(f"grid={gval:g} success_fraction={frac:.4f}")
            print(_format_summary(result))
        else:
            result = run_stat_rate(spec)
            for gval, m, sd in zip(result["grid"], result["mean_sq_rel_err"], result["std_sq_rel_err"]):
                print(f"grid={gval:g} mean_sq_rel_err={m:.6g} std={sd:.6g}")
            print(_format_summary(result))
    except LrsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Experiment harness: single solves, convergence traces, phase-transition
sweeps, and statistical-rate sweeps over planted instances.

Per-instance seeds are derived deterministically from the master seed and the
(grid point, trial) pair, so every artifact is reproducible and trials can be
dispatched to worker threads without affecting results.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .matrixio import TRACE_COLUMNS, load_matrix, save_matrix, save_trace
from .metrics import measure_incoherence, relative_error, rmse
from .models import ObservationModel, RpcaProblem
from .solver import InitConfig, Solution, SolverConfig, solve
from .synthetic import GroundTruth, gen_rpca, gen_sensing, make_ground_truth

__all__ = [
    "ExperimentSpec",
    "EXACT_RECOVERY_TOL",
    "trial_seed",
    "run_single",
    "run_convergence",
    "run_phase_transition",
    "run_stat_rate",
]

# Exact-recovery success threshold for phase-transition sweeps.
EXACT_RECOVERY_TOL = 1e-3

_KINDS = ("single", "convergence", "phase_transition", "stat_rate")
_MODELS = ("sensing", "rpca_full", "rpca_partial")


@dataclass
class ExperimentSpec:
    """Everything a run needs: problem geometry, sweep grid, solver overrides,
    output location, and the master seed."""

    kind: str = "single"
    model: str = "rpca_full"
    d1: int = 100
    d2: int = 100
    r: int = 5
    beta: float = 0.05
    amplitude: Optional[float] = None  # corruption value range; defaults to r
    s_count: Optional[int] = None  # solver sparsity budget; defaults to nnz(S*)
    n: Optional[int] = None  # sensing measurement count (single/convergence)
    p: float = 1.0  # observed fraction for rpca_partial
    grid: tuple[float, ...] = ()  # n values (sensing) or p values (rpca) for sweeps
    trials: int = 30
    noise_nu: float = 0.0
    solver: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)
    out_dir: Path = Path(".")
    master_seed: int = 42
    threads: int = 1
    plot: bool = True
    timing: bool = False
    input_matrix: Optional[Path] = None  # pre-formed data matrix for rpca runs
    save_solution: bool = False

    def validate(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.model not in _MODELS:
            raise ParameterError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.kind in ("phase_transition", "stat_rate") and not self.grid:
            raise ParameterError(f"{self.kind} requires a nonempty grid")
        if self.model == "sensing" and self.kind in ("single", "convergence"):
            if self.input_matrix is None and self.n is None:
                raise ParameterError("sensing runs need n (measurement count)")
        if self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")
        if self.noise_nu < 0:
            raise ParameterError(f"noise_nu must be >= 0, got {self.noise_nu}")


def trial_seed(master_seed: int, grid_index: int, trial: int) -> int:
    """Deterministic per-(grid point, trial) seed derived from the master seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(grid_index, trial))
    return int(ss.generate_state(1)[0])


def _resolved_amplitude(spec: ExperimentSpec) -> float:
    return float(spec.r) if spec.amplitude is None else float(spec.amplitude)


def _build_instance(
    spec: ExperimentSpec,
    seed: int,
    n: Optional[int] = None,
    p: Optional[float] = None,
) -> tuple[ObservationModel, GroundTruth]:
    """Plant one instance for the given derived seed; n/p override the spec's
    single-run values during sweeps."""
    ss = np.random.SeedSequence(seed)
    truth_ss, obs_ss = ss.spawn(2)
    truth = make_ground_truth(
        spec.d1, spec.d2, spec.r, spec.beta, _resolved_amplitude(spec), truth_ss,
        s_count=spec.s_count,
    )
    if spec.model == "sensing":
        count = spec.n if n is None else n
        model: ObservationModel = gen_sensing(
            truth.x_star, truth.s_star, int(count), spec.noise_nu, obs_ss
        )
    else:
        rate = 1.0 if spec.model == "rpca_full" else (spec.p if p is None else p)
        model = gen_rpca(truth.x_star, truth.s_star, float(rate), spec.noise_nu, obs_ss)
    return model, truth


def _configs(spec: ExperimentSpec, seed: int, truth: Optional[GroundTruth]) -> tuple[SolverConfig, InitConfig]:
    kwargs = dict(spec.solver)
    kwargs.setdefault("r", spec.r)
    kwargs.setdefault("beta", spec.beta)
    kwargs.setdefault("seed", seed)
    if truth is not None:
        kwargs.setdefault("s_count", truth.s_count)
        kwargs.setdefault("alpha", truth.alpha_actual)
    cfg = SolverConfig(**kwargs)
    icfg = InitConfig(**spec.init)
    cfg.validate()
    icfg.validate()
    return cfg, icfg


# The output directory is where the artifact lives and threads/plot are pure
# execution knobs (results are thread-invariant by contract); leaving them out
# keeps same-seed reruns byte-identical wherever and however they run.
_COMMENT_SKIP = ("solver", "init", "out_dir", "threads", "plot")


def _config_comment(spec: ExperimentSpec, cfg: SolverConfig, icfg: InitConfig) -> str:
    parts = []
    for src in (asdict(spec), asdict(cfg), asdict(icfg)):
        for key, val in sorted(src.items()):
            if key in _COMMENT_SKIP:
                continue
            parts.append(f"{key}={val}")
    return "config: " + " ".join(parts)


def _solve_instance(
    spec: ExperimentSpec, gi: int, trial: int, n: Optional[int] = None, p: Optional[float] = None
) -> tuple[Solution, GroundTruth, SolverConfig, InitConfig]:
    seed = trial_seed(spec.master_seed, gi, trial)
    model, truth = _build_instance(spec, seed, n=n, p=p)
    cfg, icfg = _configs(spec, seed, truth)
    return solve(model, cfg, icfg, truth), truth, cfg, icfg


def _map_trials(fn: Callable, tasks: Sequence, threads: int) -> list:
    if threads <= 1:
        return [fn(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _summary(sol: Solution, truth: Optional[GroundTruth], secs: float) -> dict:
    out = {
        "iterations": len(sol.trace.phase_records("gd")),
        "secs": secs,
        "objective": sol.trace.records[-1].objective if len(sol.trace) else float("nan"),
    }
    if truth is not None:
        out["rel_err_x"] = relative_error(sol.x_hat, truth.x_star)
        s_norm = float(np.linalg.norm(truth.s_star))
        out["rel_err_s"] = (
            float(np.linalg.norm(sol.sparse - truth.s_star)) / s_norm if s_norm > 0 else None
        )
        out["rmse"] = rmse(sol.x_hat, truth.x_star)
    return out


def run_single(spec: ExperimentSpec) -> dict:
    """One instance, one solve; writes trace.csv (plus a figure and the
    recovered matrices on request) and returns the summary dict."""
    spec.validate()
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    seed = trial_seed(spec.master_seed, 0, 0)
    if spec.input_matrix is not None:
        y = load_matrix(spec.input_matrix)
        mask = np.ones(y.shape, dtype=bool)
        model: ObservationModel = RpcaProblem(observed=y, mask=mask, p=1.0)
        truth = None
        kwargs = dict(spec.solver)
        kwargs.setdefault("r", spec.r)
        kwargs.setdefault("beta", spec.beta)
        kwargs.setdefault("seed", seed)
        kwargs.setdefault("s_count", spec.s_count if spec.s_count is not None
                          else round(spec.beta * y.shape[0] * y.shape[1]))
        kwargs.setdefault("alpha", max(1.0, measure_incoherence(y, spec.r)))
        cfg = SolverConfig(**kwargs)
        icfg = InitConfig(**spec.init)
        cfg.validate()
        icfg.validate()
        t0 = time.perf_counter()
        sol = solve(model, cfg, icfg)
        secs = time.perf_counter() - t0
    else:
        model, truth = _build_instance(spec, seed)
        cfg, icfg = _configs(spec, seed, truth)
        t0 = time.perf_counter()
        sol = solve(model, cfg, icfg, truth)
        secs = time.perf_counter() - t0

    trace_path = out_dir / "trace.csv"
    save_trace(trace_path, sol.trace, _config_comment(spec, cfg, icfg), include_timing=spec.timing)
    if spec.save_solution:
        save_matrix(out_dir / "x_hat.lrsm", sol.x_hat)
        save_matrix(out_dir / "s_hat.lrsm", sol.sparse)
    summary = _summary(sol, truth, secs)
    summary["trace_csv"] = str(trace_path)
    if spec.plot:
        from . import plotting

        summary["figure"] = str(plotting.plot_trace(sol.trace, out_dir / "trace.png"))
    return summary


def run_convergence(spec: ExperimentSpec) -> dict:
    """Per-iteration traces over `trials` planted instances, long-format CSV
    (trial column + trace columns)."""
    spec.validate()
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = _map_trials(
        lambda t: _solve_instance(spec, 0, t), list(range(spec.trials)), spec.threads
    )
    csv_path = out_dir / "convergence.csv"
    cfg, icfg = results[0][2], results[0][3]
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# {_config_comment(spec, cfg, icfg)}\n")
        fh.write("trial," + ",".join(TRACE_COLUMNS) + "\n")
        for t, (sol, _, _, _) in enumerate(results):
            for rec in sol.trace:
                fields = (
                    str(t),
                    str(rec.iteration),
                    rec.phase,
                    _csv_float(rec.objective),
                    _csv_float(rec.rel_err_x),
                    _csv_float(rec.rel_err_s),
                    _csv_float(rec.d2_z),
                    _csv_float(rec.d_zs),
                    _csv_float(rec.secs) if spec.timing else "",
                )
                fh.write(",".join(fields) + "\n")

    out = {"csv": str(csv_path), "trials": spec.trials}
    if spec.plot:
        from . import plotting

        traces = [sol.trace for sol, _, _, _ in results]
        out["figure"] = str(plotting.plot_convergence(traces, out_dir / "convergence.png"))
    return out


def run_phase_transition(spec: ExperimentSpec) -> dict:
    """Success fraction (relative error <= 1e-3) per grid point; noiseless only."""
    spec.validate()
    if spec.noise_nu != 0:
        raise ParameterError("phase transition requires a noiseless spec (noise_nu = 0)")
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sweep_name = "n" if spec.model == "sensing" else "p"
    fractions: list[float] = []
    counts: list[int] = []
    for gi, gval in enumerate(spec.grid):
        if spec.model == "sensing" and gval < 1:
            # No measurements: nothing can be recovered, skip the solves.
            fractions.append(0.0)
            counts.append(0)
            continue

        def one(trial: int, gi=gi, gval=gval) -> float:
            kw = {"n": int(gval)} if spec.model == "sensing" else {"p": float(gval)}
            sol, truth, _, _ = _solve_instance(spec, gi, trial, **kw)
            return relative_error(sol.x_hat, truth.x_star)

        errs = _map_trials(one, list(range(spec.trials)), spec.threads)
        succ = sum(1 for e in errs if e <= EXACT_RECOVERY_TOL)
        fractions.append(succ / spec.trials)
        counts.append(succ)
    csv_path = out_dir / "phase.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# {_phase_comment(spec)}\n")
        fh.write(f"{sweep_name},success_fraction,successes,trials\n")
        for gval, frac, succ in zip(spec.grid, fractions, counts):
            fh.write(f"{gval:.17g},{frac:.17g},{succ},{spec.trials}\n")

    out = {"csv": str(csv_path), "grid": list(spec.grid), "success_fraction": fractions}
    if spec.plot:
        from . import plotting

        out["figure"] = str(
            plotting.plot_phase(list(spec.grid), fractions, sweep_name, out_dir / "phase.png")
        )
    return out


def run_stat_rate(spec: ExperimentSpec) -> dict:
    """Mean and standard deviation of the final squared relative error per
    grid point (n for sensing, p for rpca)."""
    spec.validate()
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sweep_name = "n" if spec.model == "sensing" else "p"
    means: list[float] = []
    stds: list[float] = []
    for gi, gval in enumerate(spec.grid):

        def one(trial: int, gi=gi, gval=gval) -> float:
            kw = {"n": int(gval)} if spec.model == "sensing" else {"p": float(gval)}
            sol, truth, _, _ = _solve_instance(spec, gi, trial, **kw)
            return relative_error(sol.x_hat, truth.x_star) ** 2

        sq = np.array(_map_trials(one, list(range(spec.trials)), spec.threads))
        means.append(float(sq.mean()))
        stds.append(float(sq.std()))

    csv_path = out_dir / "rate.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# {_phase_comment(spec)}\n")
        fh.write(f"{sweep_name},mean_sq_rel_err,std_sq_rel_err\n")
        for gval, m, sd in zip(spec.grid, means, stds):
            fh.write(f"{gval:.17g},{m:.17g},{sd:.17g}\n")

    out = {"csv": str(csv_path), "grid": list(spec.grid), "mean_sq_rel_err": means, "std_sq_rel_err": stds}
    if spec.plot:
        from . import plotting

        out["figure"] = str(
            plotting.plot_rate(list(spec.grid), means, stds, sweep_name, out_dir / "rate.png")
        )
    return out


def _csv_float(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.17g}"


def _phase_comment(spec: ExperimentSpec) -> str:
    parts = [f"{k}={v}" for k, v in sorted(asdict(spec).items()) if k not in _COMMENT_SKIP]
    for scope, overrides in (("solver", spec.solver), ("init", spec.init)):
        for k, v in sorted(overrides.items()):
            parts.append(f"{scope}.{k}={v}")
    return "config: " + " ".join(parts)

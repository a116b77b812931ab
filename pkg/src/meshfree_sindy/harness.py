"""End-to-end discovery pipeline and experiment grids.

`run_trial` wires the whole method together: sample the exact field,
inject noise, fit the surrogate, extract derivatives, assemble the
dictionary, run the ensemble-wrapped sparse solver, aggregate, and judge
success against the ground truth.  `run_grid` sweeps (sample size x
noise level x trial) with isolated per-trial seeds and emits the
success-rate tables.
"""

from __future__ import annotations

import json
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dictionary import AssemblyError, assemble_from_table
from .metrics import MetricReport, full_report, judge_success
from .network import TrainingDivergenceError, derivative_table, train
from .pde_data import inject_noise, sample_scattered
from .presets import PdeProblem, get_problem, with_overrides
from .solvers import EnsembleResult, SparseModel, aggregate, ensemble_discover

WORKERS_ENV = "MESHFREE_SINDY_WORKERS"


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    pde: str
    sample_sizes: tuple[int, ...]
    noise_levels: tuple[float, ...]
    trials_per_cell: int = 12
    base_seed: int = 0
    overrides: dict = field(default_factory=dict)
    epoch_checkpoints: tuple[int, ...] = ()

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be >= 1")
        if any(l < 0 for l in self.noise_levels):
            raise ValueError("noise levels must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {"pde", "sample_sizes", "noise_levels", "trials_per_cell",
                 "base_seed", "overrides", "epoch_checkpoints"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(
                f"unknown config keys {sorted(unknown)}; expected a subset of "
                f"{sorted(known)}"
            )
        doc = dict(doc)
        for key in ("sample_sizes", "noise_levels", "epoch_checkpoints"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)


# --------------------------------------------------------------------------
# seed derivation: isolated, splittable per (pde, N, noise, trial)
# --------------------------------------------------------------------------

def trial_seed(base_seed: int, pde: str, n: int, noise: float, trial: int) -> int:
    pde_tag = int.from_bytes(pde.encode()[:8].ljust(8, b"\0"), "big")
    seq = np.random.SeedSequence(
        [base_seed, pde_tag, n, int(round(noise * 1_000_000)), trial]
    )
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _spawn_seeds(seed: int, count: int) -> list[int]:
    return [int(child.generate_state(1, dtype=np.uint64)[0])
            for child in np.random.SeedSequence(seed).spawn(count)]


# --------------------------------------------------------------------------
# single trial
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialResult:
    model: SparseModel | None
    report: MetricReport | None
    success: bool
    wall_seconds: float
    equation: str
    ensemble: EnsembleResult | None = None
    error: str | None = None


def run_trial(pde: str, n: int, noise: float, seed: int,
              overrides: dict | None = None,
              keep_ensemble: bool = False) -> TrialResult:
    """One full discovery run; deterministic under (arguments, seed).

    Training divergence and non-finite dictionary entries are recorded as
    failed trials rather than raised, so grids always complete.
    """
    problem = with_overrides(get_problem(pde), overrides)
    start = time.perf_counter()
    try:
        model, report, ens, labels = _pipeline(problem, n, noise, seed)
    except (TrainingDivergenceError, AssemblyError) as exc:
        return TrialResult(model=None, report=None, success=False,
                           wall_seconds=time.perf_counter() - start,
                           equation="", error=f"{type(exc).__name__}: {exc}")
    success = judge_success(model, problem.truth, labels)
    return TrialResult(
        model=model, report=report, success=success,
        wall_seconds=time.perf_counter() - start,
        equation=format_equation(model, labels),
        ensemble=ens if keep_ensemble else None,
    )


def _pipeline(problem: PdeProblem, n: int, noise: float, seed: int):
    data_seed, noise_seed, train_seed, ens_seed = _spawn_seeds(seed, 4)
    clean = sample_scattered(problem.field, problem.domain, n, data_seed)
    noisy = inject_noise(clean, noise, noise_seed)
    cfg = replace(problem.train, seed=train_seed)
    params, _, _ = train(noisy, problem.layer_sizes, cfg)
    table = derivative_table(params, noisy.points, problem.request)
    dictionary = assemble_from_table(table, problem.terms)
    ens = ensemble_discover(
        dictionary.theta, dictionary.target, problem.solver,
        n_replicates=problem.ensemble.n_replicates,
        subsample_size=problem.ensemble.subsample_size(n),
        seed=ens_seed,
    )
    model = aggregate(ens, problem.ensemble.inclusion_cutoff)
    true_dudt = problem.analytic_table(noisy.points, {"u_t"})["u_t"]
    report = full_report(noisy, clean, params, model, dictionary, true_dudt)
    return model, report, ens, problem.labels


def epoch_evolution(pde: str, n: int, noise: float, seed: int,
                    checkpoints: tuple[int, ...],
                    overrides: dict | None = None
                    ) -> list[tuple[int, EnsembleResult]]:
    """Pause training at each checkpoint epoch and run ensemble discovery
    on the surrogate as trained so far.  A final checkpoint at the last
    epoch reproduces `run_trial`'s ensemble exactly (same seeds)."""
    problem = with_overrides(get_problem(pde), overrides)
    if list(checkpoints) != sorted(checkpoints):
        raise ValueError("checkpoints must be ascending")
    if checkpoints and checkpoints[-1] > problem.train.epochs:
        raise ValueError("checkpoints must not exceed total epochs")
    data_seed, noise_seed, train_seed, ens_seed = _spawn_seeds(seed, 4)
    clean = sample_scattered(problem.field, problem.domain, n, data_seed)
    noisy = inject_noise(clean, noise, noise_seed)
    cfg = replace(problem.train, seed=train_seed)
    _, _, snapshots = train(noisy, problem.layer_sizes, cfg,
                            checkpoint_epochs=tuple(checkpoints))
    out = []
    for epoch in checkpoints:
        params = snapshots[epoch]
        table = derivative_table(params, noisy.points, problem.request)
        dictionary = assemble_from_table(table, problem.terms)
        ens = ensemble_discover(
            dictionary.theta, dictionary.target, problem.solver,
            n_replicates=problem.ensemble.n_replicates,
            subsample_size=problem.ensemble.subsample_size(n),
            seed=ens_seed,
        )
        out.append((epoch, ens))
    return out


# --------------------------------------------------------------------------
# grid execution
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CellResult:
    successes: int
    trials: int
    mean_wall_seconds: float
    per_trial: tuple[TrialResult, ...]

    @property
    def rate(self) -> float:
        return self.successes / self.trials


@dataclass(frozen=True)
class GridResult:
    config: ExperimentConfig
    cells: dict[tuple[int, float], CellResult]


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _trial_task(args) -> TrialResult:
    pde, n, noise, seed, overrides = args
    return run_trial(pde, n, noise, seed, overrides)


def run_grid(cfg: ExperimentConfig) -> GridResult:
    """Run every (sample size, noise, trial) cell; per-trial failures are
    counted as unsuccessful and never abort the grid."""
    tasks = []
    keys = []
    for n in cfg.sample_sizes:
        for noise in cfg.noise_levels:
            for trial in range(cfg.trials_per_cell):
                seed = trial_seed(cfg.base_seed, cfg.pde, n, noise, trial)
                tasks.append((cfg.pde, n, noise, seed, cfg.overrides))
                keys.append((n, noise))
    workers = _worker_count()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_task, tasks))
    else:
        results = [_trial_task(t) for t in tasks]
    cells: dict[tuple[int, float], list[TrialResult]] = {}
    for key, result in zip(keys, results):
        cells.setdefault(key, []).append(result)
    out = {}
    for key, trials in cells.items():
        out[key] = CellResult(
            successes=sum(t.success for t in trials),
            trials=len(trials),
            mean_wall_seconds=float(np.mean([t.wall_seconds for t in trials])),
            per_trial=tuple(trials),
        )
    return GridResult(config=cfg, cells=out)


# --------------------------------------------------------------------------
# equation formatting
# --------------------------------------------------------------------------

def format_equation(model: SparseModel, labels) -> str:
    """Render a sparse model as e.g. 'u_t = -1.00*u*u_x +0.49*u_xx'."""
    labels = list(labels)
    parts = [f"{model.coefficients[j]:+.2f}*{labels[j]}"
             for j in model.support_indices]
    return "u_t = " + (" ".join(parts) if parts else "0")


_TERM_RE = re.compile(r"([+-]\d+\.\d+)\*(\S+)")


def parse_equation(text: str) -> dict[str, float]:
    """Inverse of format_equation: term label -> coefficient (2 decimals)."""
    if not text.startswith("u_t = "):
        raise ValueError(f"not a recovered-equation line: {text!r}")
    return {label: float(coef) for coef, label in _TERM_RE.findall(text)}


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _cell_doc(key, cell: CellResult) -> dict:
    n, noise = key
    return {
        "samples": n,
        "noise": noise,
        "successes": cell.successes,
        "trials": cell.trials,
        "rate": cell.rate,
        "mean_wall_seconds": cell.mean_wall_seconds,
        "per_trial": [
            {
                "success": t.success,
                "equation": t.equation,
                "wall_seconds": t.wall_seconds,
                "error": t.error,
                "metrics": t.report.as_dict() if t.report else None,
                "coefficients": ([float(c) for c in t.model.coefficients]
                                 if t.model is not None else None),
            }
            for t in cell.per_trial
        ],
    }


def _sorted_cells(grid: GridResult):
    return sorted(grid.cells.items(), key=lambda kv: (kv[0][0], kv[0][1]))


def emit_report(grid: GridResult, fmt: str) -> str:
    """Serialize a grid: 'json' (full), 'csv' (one row per cell), or
    'markdown' (success-rate matrix plus recovered equations)."""
    if fmt == "json":
        doc = {
            "pde": grid.config.pde,
            "config": {
                "sample_sizes": list(grid.config.sample_sizes),
                "noise_levels": list(grid.config.noise_levels),
                "trials_per_cell": grid.config.trials_per_cell,
                "base_seed": grid.config.base_seed,
            },
            "cells": [_cell_doc(k, c) for k, c in _sorted_cells(grid)],
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    if fmt == "csv":
        lines = ["pde,samples,noise,successes,trials,rate,mean_seconds"]
        for (n, noise), cell in _sorted_cells(grid):
            lines.append(
                f"{grid.config.pde},{n},{noise},{cell.successes},"
                f"{cell.trials},{cell.rate:.6f},{cell.mean_wall_seconds:.3f}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        return _markdown_report(grid)
    raise ValueError(f"unknown report format {fmt!r}")


def _markdown_report(grid: GridResult) -> str:
    sizes = sorted(grid.config.sample_sizes)
    noises = sorted(grid.config.noise_levels)
    lines = [f"## {grid.config.pde}: success rate (%)", ""]
    header = "| Samples | " + " | ".join(f"{100 * l:g}% Noise" for l in noises) + " |"
    lines += [header, "|" + "---|" * (len(noises) + 1)]
    for n in sizes:
        cells = [grid.cells[(n, l)] for l in noises if (n, l) in grid.cells]
        row = " | ".join(f"{100 * c.rate:.1f}" for c in cells)
        lines.append(f"| {n} | {row} |")
    lines += ["", "### Recovered equations", ""]
    for (n, noise), cell in _sorted_cells(grid):
        eq = _representative_equation(cell)
        lines.append(f"- N={n}, noise={100 * noise:g}%: `{eq}`")
    return "\n".join(lines) + "\n"


def _representative_equation(cell: CellResult) -> str:
    for t in cell.per_trial:
        if t.success:
            return t.equation
    for t in cell.per_trial:
        if t.equation:
            return t.equation
    return "u_t = 0"

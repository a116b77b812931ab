"""Command-line interface.

Subcommands: generate (sample a dataset), train (fit a surrogate),
discover (dataset -> sparse model JSON), experiment (run a grid from a
config file), report (re-render a saved grid JSON).

Exit codes: 0 success, 1 invalid configuration or arguments, 2 I/O
failure, 3 internal numerical failure that aborted a whole run.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dictionary import AssemblyError, assemble_from_table
from .harness import ExperimentConfig, emit_report, run_grid, trial_seed
from .network import (TrainingDivergenceError, derivative_table,
                      load_checkpoint, save_checkpoint, train)
from .pde_data import inject_noise, load_dataset, sample_scattered, save_dataset
from .presets import PRESETS, get_problem
from .solvers import aggregate, ensemble_discover, save_model

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meshfree-sindy")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a scattered noisy dataset")
    gen.add_argument("--pde", required=True, choices=PRESETS)
    gen.add_argument("--samples", type=int, required=True)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    tr = sub.add_parser("train", help="fit a surrogate to a dataset CSV")
    tr.add_argument("--data", required=True)
    tr.add_argument("--preset", required=True, choices=PRESETS)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True)

    dis = sub.add_parser("discover", help="dataset -> sparse model JSON")
    dis.add_argument("--data", required=True)
    dis.add_argument("--preset", required=True, choices=PRESETS)
    dis.add_argument("--checkpoint", help="reuse a trained surrogate")
    dis.add_argument("--epochs", type=int, default=None)
    dis.add_argument("--seed", type=int, default=0)
    dis.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run a grid from a JSON config")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True, help="output directory")

    rep = sub.add_parser("report", help="re-render a saved grid JSON")
    rep.add_argument("--grid", required=True)
    rep.add_argument("--format", required=True, choices=("json", "csv", "markdown"))
    return parser


def _cmd_generate(args) -> int:
    problem = get_problem(args.pde)
    ds = sample_scattered(problem.field, problem.domain, args.samples, args.seed)
    ds = inject_noise(ds, args.noise, args.seed + 1)
    save_dataset(ds, args.out, metadata={"pde": args.pde,
                                         "parameters": problem.parameters})
    print(f"wrote {args.samples} samples to {args.out}")
    return EXIT_OK


def _train_surrogate(args, ds):
    problem = get_problem(args.preset)
    cfg = replace(problem.train, seed=args.seed)
    if args.epochs is not None:
        cfg = replace(cfg, epochs=args.epochs)
    params, trace, _ = train(ds, problem.layer_sizes, cfg)
    return problem, params, trace


def _cmd_train(args) -> int:
    ds, _ = load_dataset(args.data)
    _, params, trace = _train_surrogate(args, ds)
    save_checkpoint(params, args.out)
    print(f"final train MSE {trace.train_mse[-1]:.6g}; checkpoint at {args.out}")
    return EXIT_OK


def _cmd_discover(args) -> int:
    ds, _ = load_dataset(args.data)
    problem = get_problem(args.preset)
    if args.checkpoint:
        params = load_checkpoint(args.checkpoint)
    else:
        _, params, _ = _train_surrogate(args, ds)
    table = derivative_table(params, ds.points, problem.request)
    dictionary = assemble_from_table(table, problem.terms)
    ens = ensemble_discover(
        dictionary.theta, dictionary.target, problem.solver,
        n_replicates=problem.ensemble.n_replicates,
        subsample_size=problem.ensemble.subsample_size(len(ds)),
        seed=args.seed,
    )
    model = aggregate(ens, problem.ensemble.inclusion_cutoff)
    save_model(model, problem.labels, args.out, ensemble=ens)
    from .harness import format_equation

    print(format_equation(model, problem.labels))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    grid = run_grid(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fmt, name in (("json", "grid.json"), ("csv", "grid.csv"),
                      ("markdown", "grid.md")):
        (out / name).write_text(emit_report(grid, fmt))
    print(emit_report(grid, "markdown"))
    return EXIT_OK


def _cmd_report(args) -> int:
    doc = json.loads(Path(args.grid).read_text())
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK
    if args.format == "csv":
        lines = ["pde,samples,noise,successes,trials,rate,mean_seconds"]
        for cell in doc["cells"]:
            lines.append(
                f"{doc['pde']},{cell['samples']},{cell['noise']},"
                f"{cell['successes']},{cell['trials']},{cell['rate']:.6f},"
                f"{cell['mean_wall_seconds']:.3f}"
            )
        print("\n".join(lines))
        return EXIT_OK
    lines = [f"## {doc['pde']}: success rate (%)", ""]
    for cell in doc["cells"]:
        lines.append(
            f"- N={cell['samples']}, noise={100 * cell['noise']:g}%: "
            f"{100 * cell['rate']:.1f}%"
        )
    print("\n".join(lines))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "discover": _cmd_discover,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TrainingDivergenceError, AssemblyError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

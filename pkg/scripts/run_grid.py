#!/usr/bin/env python3
"""Run a success-rate grid for one equation preset and write reports.

Example:
    python3 scripts/run_grid.py --pde burgers \
        --samples 100 1000 5000 --noise 0.01 0.25 --trials 12 --out results/burgers
"""

import argparse
from pathlib import Path

from meshfree_sindy.harness import ExperimentConfig, emit_report, run_grid
from meshfree_sindy.presets import PRESETS


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pde", required=True, choices=PRESETS)
    ap.add_argument("--samples", type=int, nargs="+", required=True)
    ap.add_argument("--noise", type=float, nargs="+", required=True)
    ap.add_argument("--trials", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    cfg = ExperimentConfig(pde=args.pde, sample_sizes=tuple(args.samples),
                           noise_levels=tuple(args.noise),
                           trials_per_cell=args.trials, base_seed=args.seed)
    grid = run_grid(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fmt, name in (("json", "grid.json"), ("csv", "grid.csv"),
                      ("markdown", "grid.md")):
        (out / name).write_text(emit_report(grid, fmt))
    print(emit_report(grid, "markdown"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Track term inclusion probabilities and coefficient spread across
training checkpoints (ensemble discovery repeated as the surrogate trains).

Example:
    python3 scripts/coefficient_evolution.py --pde burgers --samples 2000 \
        --noise 0.01 --checkpoints 50 100 150 200
"""

import argparse

import numpy as np

from meshfree_sindy.harness import epoch_evolution, trial_seed
from meshfree_sindy.presets import PRESETS, get_problem


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pde", required=True, choices=PRESETS)
    ap.add_argument("--samples", type=int, required=True)
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--checkpoints", type=int, nargs="+", required=True)
    args = ap.parse_args()

    problem = get_problem(args.pde)
    labels = problem.labels
    seed = trial_seed(args.seed, args.pde, args.samples, args.noise, 0)
    evolution = epoch_evolution(args.pde, args.samples, args.noise, seed,
                                tuple(args.checkpoints))

    interesting = [labels.index(l) for l in problem.truth.true_support]
    header = "epoch".ljust(8) + "".join(
        labels[j].rjust(16) for j in interesting) + "    max spurious"
    print(header)
    for epoch, ens in evolution:
        cells = []
        for j in interesting:
            active = ens.coefficient_samples[:, j][
                np.array([m.support[j] for m in ens.replicates])]
            med = float(np.median(active)) if active.size else 0.0
            cells.append(f"{ens.inclusion_probability[j]:.2f} ({med:+.2f})")
        spurious = [p for j, p in enumerate(ens.inclusion_probability)
                    if j not in interesting]
        print(f"{epoch:<8d}" + "".join(c.rjust(16) for c in cells)
              + f"{max(spurious):16.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

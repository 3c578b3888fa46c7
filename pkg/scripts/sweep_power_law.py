"""Accuracy sweep and power-law fits ``epsilon = A / N**c`` for each estimator.

The grid is relative to the coefficient one-norm by default, so the same
command works for any instance.
"""

import argparse
from importlib.resources import files

from ebs_energy import bench


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--file", default=str(files("ebs_energy") / "data" / "chain4_weak.txt"))
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--smallest", type=int, default=3, help="points in the small-epsilon fit")
    parser.add_argument("--absolute", action="store_true", help="grid in energy units, not relative")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--output", default="power_law_sweep.csv")
    args = parser.parse_args()

    inst = bench.prepare_file(args.file)
    grid = bench.default_epsilons()
    if not args.absolute:
        grid = [e * inst.one_norm for e in grid]
    records = bench.sweep(inst, grid, bench.ESTIMATORS, trials=args.trials, seed=args.seed,
                          workers=args.workers)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        bench.write_records(records, fh, {"script": "sweep_power_law", "seed": args.seed})

    medians = bench.median_rounds(records)
    print(f"{inst.label}: N_g={inst.n_groups} one_norm={inst.one_norm:.4f}")
    for est in bench.ESTIMATORS:
        full = bench.fit_power_law(medians[est])
        small = bench.fit_power_law(medians[est][: args.smallest])
        print(f"{est:>16}: c={full.c:.3f} (all {full.points}), c={small.c:.3f} "
              f"(smallest {small.points}), A={full.A:.3g}")
        for eps, n in medians[est]:
            print(f"{'':>18}eps={eps:.3e}  median rounds={n:.0f}")
    print(f"wrote {len(records)} records to {args.output}")


if __name__ == "__main__":
    main()

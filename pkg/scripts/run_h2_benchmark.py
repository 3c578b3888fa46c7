"""Grouped EBS versus the Hoeffding budget on the bundled 2-qubit instance.

Prints median rounds, the N_EBS/N_Hoeff ratio and the error distribution for
a few accuracies, then writes all records to a CSV.
"""

import argparse
import statistics
from importlib.resources import files

from ebs_energy import bench


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--file", default=str(files("ebs_energy") / "data" / "h2_2q.txt"))
    parser.add_argument("--epsilons", type=float, nargs="+", default=[1.6e-3, 5e-3, 1e-2])
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--output", default="h2_benchmark.csv")
    args = parser.parse_args()

    inst = bench.prepare_file(args.file)
    print(f"{inst.label}: n={inst.hamiltonian.n} N_g={inst.n_groups} "
          f"one_norm={inst.one_norm:.4f} E0={inst.exact_energy:.10f}")
    print(f"{'epsilon':>10} {'N_Hoeff':>10} {'median N':>10} {'ratio':>7} {'err<=eps':>9} {'err<=eps/4':>11}")
    records = []
    for i, eps in enumerate(args.epsilons):
        recs = bench.run_trials(inst, bench.GROUPED, eps, trials=args.trials, seed=args.seed,
                                key=(i,), workers=args.workers)
        records += recs
        med = statistics.median(r.rounds_used for r in recs)
        n_hoeff = recs[0].hoeffding_rounds
        within = sum(r.error <= eps for r in recs) / len(recs)
        quarter = sum(r.error <= eps / 4 for r in recs) / len(recs)
        print(f"{eps:>10.2e} {n_hoeff:>10d} {med:>10.0f} {med / n_hoeff:>7.3f} {within:>9.2f} {quarter:>11.2f}")
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        bench.write_records(records, fh, {"script": "run_h2_benchmark", "seed": args.seed})
    print(f"wrote {len(records)} records to {args.output}")


if __name__ == "__main__":
    main()

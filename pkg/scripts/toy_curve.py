"""Curve over a synthetic family of 2-qubit Hamiltonians labelled by a distance D.

The coefficients are a smooth made-up family with the same Pauli structure
as the bundled instance (not chemistry); the point is to exercise the
``curve`` subcommand end to end and look at N_EBS / N_Hoeff across D.
"""

import argparse
import math
import tempfile
from pathlib import Path

from ebs_energy.cli import main as cli_main


def coefficients(d: float) -> dict[str, float]:
    decay = math.exp(-(d - 0.5))
    return {
        "II": -1.0 + 0.6 / d,
        "ZI": 0.35 * decay + 0.05,
        "IZ": -0.45 * decay - 0.05,
        "ZZ": 0.55 - 0.1 * d,
        "XX": 0.09 + 0.05 * (d - 0.5),
        "YY": 0.09 + 0.05 * (d - 0.5),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--distances", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.5, 2.0, 2.5])
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--epsilon", type=str, default="1.6e-3")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", default="toy_curve.csv")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        for d in args.distances:
            lines = [f"{c!r} {p}" for p, c in coefficients(d).items()]
            (Path(tmp) / f"{d:.2f}.txt").write_text("\n".join(lines) + "\n")
        code = cli_main(["curve", tmp, "--trials", str(args.trials), "--epsilon", args.epsilon,
                         "--seed", str(args.seed), "-o", args.output])
    if code == 0:
        print(Path(args.output).read_text())
    raise SystemExit(code)


if __name__ == "__main__":
    main()

"""``ebs-energy`` command line: group | estimate | sweep | fit | curve.

Exit codes: 0 success, 2 usage, 3 input (I/O or parse), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import bench
from .estimators import hoeffding_rounds
from .grouping import greedy_group
from .pauli import HamiltonianParseError, load_hamiltonian, one_norm
from .simulator import SimulationError

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


class InputError(Exception):
    pass


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _delta(text: str) -> float:
    value = float(text)
    if not 0 < value < 0.5:
        raise argparse.ArgumentTypeError("delta must lie in (0, 1/2)")
    return value


def _beta(text: str) -> float:
    value = float(text)
    if not value > 1:
        raise argparse.ArgumentTypeError("beta must exceed 1")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return value


def _add_run_options(p: argparse.ArgumentParser, with_epsilon: bool = True) -> None:
    if with_epsilon:
        p.add_argument("--epsilon", type=_positive_float, default=bench.DEFAULT_EPSILON,
                       help="target accuracy (default: 1.6e-3)")
    p.add_argument("--delta", type=_delta, default=bench.DEFAULT_DELTA)
    p.add_argument("--beta", type=_beta, default=bench.DEFAULT_BETA)
    p.add_argument("--trials", type=_positive_int, default=bench.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-samples", type=_positive_int, default=bench.DEFAULT_MIN_SAMPLES)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--relative", action="store_true",
                   help="interpret accuracies as fractions of the coefficient one-norm")
    p.add_argument("--output", "-o", default="-", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebs-energy",
        description="Energy estimation with empirical Bernstein stopping.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="show the qubit-wise commuting grouping")
    p.add_argument("file")
    p.add_argument("--epsilon", type=_positive_float, default=bench.DEFAULT_EPSILON)
    p.add_argument("--delta", type=_delta, default=bench.DEFAULT_DELTA)

    p = sub.add_parser("estimate", help="repeated estimation at one accuracy")
    p.add_argument("file")
    p.add_argument("--estimator", choices=bench.ESTIMATORS, default=bench.GROUPED)
    p.add_argument("--label", default=None, help="distance label (default: file stem)")
    _add_run_options(p)

    p = sub.add_parser("sweep", help="estimation over a grid of accuracies")
    p.add_argument("file")
    p.add_argument("--epsilons", type=_positive_float, nargs="+", default=None,
                   help="accuracy grid (default: 7 log-spaced values in [1e-4, 1e-1])")
    p.add_argument("--estimators", choices=bench.ESTIMATORS, nargs="+",
                   default=[bench.GROUPED, bench.SINGLE_SHOT])
    _add_run_options(p, with_epsilon=False)

    p = sub.add_parser("fit", help="fit epsilon = A / N**c to a records CSV")
    p.add_argument("file", help="records CSV ('-' for stdin)")
    p.add_argument("--max-epsilon", type=_positive_float, default=None)
    p.add_argument("--smallest", type=_positive_int, default=None,
                   help="use only the k smallest accuracies")
    p.add_argument("--output", "-o", default="-")

    p = sub.add_parser("curve", help="one aggregated row per Hamiltonian file in a directory")
    p.add_argument("directory")
    p.add_argument("--estimator", choices=bench.ESTIMATORS, default=bench.GROUPED)
    p.add_argument("--pattern", default="*.txt")
    _add_run_options(p)
    return parser


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load_instance(path: str, label: str | None = None) -> bench.Instance:
    try:
        return bench.prepare_file(path, label)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except HamiltonianParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _metadata(args, **extra) -> dict:
    meta = {"command": args.command}
    for k, v in vars(args).items():
        if k not in ("command", "output"):
            meta[k] = " ".join(map(str, v)) if isinstance(v, list) else v
    meta.update(extra)
    return meta


def _scale(args, instance, eps: float) -> float:
    return eps * instance.one_norm if args.relative else eps


def cmd_group(args) -> int:
    try:
        h = load_hamiltonian(args.file)
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    except HamiltonianParseError as exc:
        raise InputError(f"{args.file}: {exc}") from None
    grouping = greedy_group(h)
    norm = one_norm(h)
    print(f"qubits: {h.n}")
    print(f"terms: {len(h.terms)}")
    print(f"offset: {h.offset!r}")
    print(f"one_norm: {norm!r}")
    print(f"hoeffding_rounds(epsilon={args.epsilon!r}, delta={args.delta!r}): "
          f"{hoeffding_rounds(norm, args.epsilon, args.delta)}")
    print(f"groups: {len(grouping)}")
    for g in grouping:
        members = " ".join(str(i) for i in g.members)
        print(f"{g.basis} {len(g.members)} {members}")
    return 0


def cmd_estimate(args) -> int:
    inst = _load_instance(args.file, args.label)
    eps = _scale(args, inst, args.epsilon)
    records = bench.run_trials(
        inst, args.estimator, eps, args.delta, args.beta, args.trials, args.seed,
        args.min_samples, workers=args.workers,
    )
    with _open_out(args.output) as out:
        bench.write_records(records, out, _metadata(args, absolute_epsilon=eps))
    return 0


def cmd_sweep(args) -> int:
    inst = _load_instance(args.file)
    grid = args.epsilons if args.epsilons is not None else bench.default_epsilons()
    grid = [_scale(args, inst, e) for e in grid]
    records = bench.sweep(
        inst, grid, args.estimators, args.delta, args.beta, args.trials, args.seed,
        args.min_samples, workers=args.workers,
    )
    with _open_out(args.output) as out:
        bench.write_records(records, out, _metadata(args, grid=" ".join(map(repr, grid))))
    return 0


def cmd_fit(args) -> int:
    try:
        if args.file == "-":
            records = bench.read_records(sys.stdin)
        else:
            with open(args.file, encoding="utf-8", newline="") as fh:
                records = bench.read_records(fh)
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc.strerror or exc}") from None
    except (ValueError, TypeError) as exc:
        raise InputError(f"{args.file}: {exc}") from None
    fits = bench.fit_records(records, args.max_epsilon, args.smallest)
    with _open_out(args.output) as out:
        out.write("estimator,A,c,residual,points\n")
        for est, f in fits.items():
            out.write(f"{est},{f.A!r},{f.c!r},{f.residual!r},{f.points}\n")
    return 0


def cmd_curve(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    files = sorted(directory.glob(args.pattern))
    if not files:
        raise InputError(f"no files matching {args.pattern!r} in {directory}")
    labels = [f.stem for f in files]
    if len(set(labels)) != len(labels):
        raise InputError("distance labels must be distinct")
    rows = []
    for idx, path in enumerate(files):
        inst = _load_instance(str(path))
        eps = _scale(args, inst, args.epsilon)
        records = bench.run_trials(
            inst, args.estimator, eps, args.delta, args.beta, args.trials, args.seed,
            args.min_samples, key=(idx,), workers=args.workers,
        )
        rows.append(bench.curve_row(inst, records))
    with _open_out(args.output) as out:
        bench.write_curve(rows, out, _metadata(args))
    return 0


COMMANDS = {
    "group": cmd_group,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "curve": cmd_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SimulationError, ValueError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

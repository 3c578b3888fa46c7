"""Benchmark harness: repeated estimation trials, CSV records, power-law fits."""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from .ebs import HOEFFDING_CAP, EBSConfig, ScheduleError, run_ebs, run_fixed
from .estimators import GroupedEstimator, SampleSource, SingleShotEstimator, hoeffding_rounds
from .grouping import Grouping, greedy_group
from .pauli import Hamiltonian, load_hamiltonian, one_norm
from .simulator import StateVector, ground_state, group_distributions

GROUPED = "grouped"
SINGLE_SHOT = "single-shot"
SINGLE_SHOT_EBS = "single-shot-ebs"
ESTIMATORS = (GROUPED, SINGLE_SHOT, SINGLE_SHOT_EBS)

DEFAULT_EPSILON = 1.6e-3
DEFAULT_DELTA = 0.1
DEFAULT_BETA = 1.1
DEFAULT_TRIALS = 100
DEFAULT_MIN_SAMPLES = 10


def default_epsilons(lo: float = 1e-4, hi: float = 1e-1, num: int = 7) -> list[float]:
    """Logarithmically equidistant accuracy grid (endpoints included)."""
    return [float(e) for e in np.logspace(math.log10(lo), math.log10(hi), num)]


@dataclass(frozen=True, eq=False)
class Instance:
    """A Hamiltonian with everything the trials share: grouping, exact ground state, samplers."""

    label: str
    distance: str
    hamiltonian: Hamiltonian
    grouping: Grouping
    exact_energy: float
    state: StateVector
    grouped: GroupedEstimator
    single_shot: SingleShotEstimator

    @property
    def one_norm(self) -> float:
        return one_norm(self.hamiltonian)

    @property
    def n_groups(self) -> int:
        return len(self.grouping)


def prepare(h: Hamiltonian, label: str = "", distance: str = "") -> Instance:
    grouping = greedy_group(h)
    energy, state = ground_state(h)
    caches = group_distributions(state, grouping)
    return Instance(
        label,
        distance,
        h,
        grouping,
        energy,
        state,
        GroupedEstimator(h, grouping, caches),
        SingleShotEstimator.from_grouping(h, grouping, caches),
    )


def prepare_file(path, distance: str | None = None) -> Instance:
    path = Path(path)
    return prepare(load_hamiltonian(path), path.name, path.stem if distance is None else distance)


@dataclass(frozen=True)
class BenchRecord:
    hamiltonian: str
    distance: str
    estimator: str
    epsilon: float
    delta: float
    beta: float
    trial: int
    seed: int
    n_groups: int
    hoeffding_rounds: int
    samples_used: int
    rounds_used: int
    terminated_by: str
    estimate: float
    exact_energy: float
    error: float


CSV_COLUMNS = tuple(f.name for f in fields(BenchRecord))
_INT_COLUMNS = {"trial", "seed", "n_groups", "hoeffding_rounds", "samples_used", "rounds_used"}
_FLOAT_COLUMNS = {"epsilon", "delta", "beta", "estimate", "exact_energy", "error"}


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 stream for one trial; ``key`` spawns it independently of execution order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def run_trial(
    instance: Instance,
    estimator: str,
    epsilon: float,
    delta: float = DEFAULT_DELTA,
    beta: float = DEFAULT_BETA,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    seed: int = 0,
    trial: int = 0,
    key: Sequence[int] = (),
) -> BenchRecord:
    n_hoeff = hoeffding_rounds(instance.one_norm, epsilon, delta)
    rng = trial_rng(seed, *key, ESTIMATORS.index(estimator), trial)
    if estimator == SINGLE_SHOT:
        result = run_fixed(SampleSource(instance.single_shot, rng), n_hoeff)
    else:
        sampler = instance.grouped if estimator == GROUPED else instance.single_shot
        source = SampleSource(sampler, rng)
        config = EBSConfig(
            epsilon, delta, sampler.value_range, beta, min_samples, cap_rounds=n_hoeff
        )
        try:
            result = run_ebs(source, config)
        except ScheduleError:
            # no room for a single check: plain sampling up to the cap
            result = run_fixed(source, max(1, n_hoeff // source.rounds_cost), HOEFFDING_CAP)
    return BenchRecord(
        hamiltonian=instance.label,
        distance=instance.distance,
        estimator=estimator,
        epsilon=float(epsilon),
        delta=float(delta),
        beta=float(beta),
        trial=trial,
        seed=seed,
        n_groups=instance.n_groups,
        hoeffding_rounds=n_hoeff,
        samples_used=result.samples_used,
        rounds_used=result.rounds_used,
        terminated_by=result.terminated_by,
        estimate=float(result.estimate),
        exact_energy=float(instance.exact_energy),
        error=abs(float(result.estimate) - float(instance.exact_energy)),
    )


def _run_batch(args):
    instance, kwargs, trials = args
    return [run_trial(instance, trial=t, **kwargs) for t in trials]


def run_trials(
    instance: Instance,
    estimator: str,
    epsilon: float,
    delta: float = DEFAULT_DELTA,
    beta: float = DEFAULT_BETA,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    key: Sequence[int] = (),
    workers: int = 1,
) -> list[BenchRecord]:
    """Independent trials, returned in trial order whatever the worker count."""
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    kwargs = dict(
        estimator=estimator,
        epsilon=epsilon,
        delta=delta,
        beta=beta,
        min_samples=min_samples,
        seed=seed,
        key=tuple(key),
    )
    if workers <= 1:
        return _run_batch((instance, kwargs, range(trials)))
    batches = [range(i, trials, workers) for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = pool.map(_run_batch, [(instance, kwargs, b) for b in batches])
        records = [r for batch in results for r in batch]
    return sorted(records, key=lambda r: r.trial)


def sweep(
    instance: Instance,
    epsilons: Sequence[float],
    estimators: Sequence[str] = (GROUPED, SINGLE_SHOT),
    delta: float = DEFAULT_DELTA,
    beta: float = DEFAULT_BETA,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    key: Sequence[int] = (),
    workers: int = 1,
) -> list[BenchRecord]:
    if not epsilons:
        raise ValueError("need at least one epsilon")
    records = []
    for e_idx, eps in enumerate(epsilons):
        for est in estimators:
            records += run_trials(
                instance, est, eps, delta, beta, trials, seed, min_samples,
                key=(*key, e_idx), workers=workers,
            )
    return records


# CSV


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_records(
    records: Iterable[BenchRecord], out: TextIO, metadata: dict | None = None
) -> None:
    """RFC 4180 CSV with ``#`` metadata lines before the header."""
    out.write(f"# tool: ebs-energy {__version__}\r\n")
    for k, v in (metadata or {}).items():
        out.write(f"# {k}: {_fmt(v)}\r\n")
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(v) for v in asdict(r).values()])


def records_to_csv(records: Iterable[BenchRecord], metadata: dict | None = None) -> str:
    buf = io.StringIO(newline="")
    write_records(records, buf, metadata)
    return buf.getvalue()


def read_records(src: TextIO | str) -> list[BenchRecord]:
    text = src if isinstance(src, str) else src.read()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
    out = []
    for row in reader:
        kw = {}
        for k, v in row.items():
            if k in _INT_COLUMNS:
                kw[k] = int(v)
            elif k in _FLOAT_COLUMNS:
                kw[k] = float(v)
            else:
                kw[k] = v
        out.append(BenchRecord(**kw))
    return out


# power-law fits


@dataclass(frozen=True)
class PowerLawFit:
    """``epsilon = A / N**c`` fitted by least squares in log-log space."""

    A: float
    c: float
    residual: float
    points: int

    def predict(self, n: float) -> float:
        return self.A / n**self.c


def fit_power_law(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Fit ``log eps = log A - c log N`` to ``(eps, N)`` pairs."""
    if len(points) < 2:
        raise ValueError("need at least two points to fit")
    eps = np.array([p[0] for p in points], dtype=float)
    n = np.array([p[1] for p in points], dtype=float)
    if np.any(eps <= 0) or np.any(n <= 0):
        raise ValueError("epsilon and N must be positive")
    x, y = np.log(n), np.log(eps)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("all N values are equal; slope undefined")
    slope = float(np.sum((x - xm) * (y - ym))) / sxx
    intercept = float(ym - slope * xm)
    resid = float(np.sum((y - (intercept + slope * x)) ** 2))
    return PowerLawFit(math.exp(intercept), -slope, resid, len(points))


def median_rounds(records: Iterable[BenchRecord]) -> dict[str, list[tuple[float, float]]]:
    """Per estimator: sorted ``(epsilon, median rounds_used)`` over trials."""
    grouped: dict[str, dict[float, list[int]]] = {}
    for r in records:
        grouped.setdefault(r.estimator, {}).setdefault(r.epsilon, []).append(r.rounds_used)
    return {
        est: sorted((e, float(statistics.median(v))) for e, v in by_eps.items())
        for est, by_eps in grouped.items()
    }


def fit_records(
    records: Iterable[BenchRecord],
    max_epsilon: float | None = None,
    smallest: int | None = None,
) -> dict[str, PowerLawFit]:
    """One fit per estimator, optionally restricted to small accuracies."""
    fits = {}
    for est, pts in median_rounds(records).items():
        if max_epsilon is not None:
            pts = [p for p in pts if p[0] <= max_epsilon]
        if smallest is not None:
            pts = pts[:smallest]
        fits[est] = fit_power_law(pts)
    return fits


# dissociation-style curves


@dataclass(frozen=True)
class CurveRow:
    distance: str
    hamiltonian: str
    n_qubits: int
    n_groups: int
    exact_energy: float
    median_estimate: float
    median_rounds: float
    hoeffding_rounds: int
    ratio: float
    fraction_within_epsilon: float


CURVE_COLUMNS = tuple(f.name for f in fields(CurveRow))


def curve_row(instance: Instance, records: Sequence[BenchRecord]) -> CurveRow:
    eps = records[0].epsilon
    med_rounds = float(statistics.median(r.rounds_used for r in records))
    n_hoeff = records[0].hoeffding_rounds
    return CurveRow(
        distance=instance.distance,
        hamiltonian=instance.label,
        n_qubits=instance.hamiltonian.n,
        n_groups=instance.n_groups,
        exact_energy=instance.exact_energy,
        median_estimate=float(statistics.median(r.estimate for r in records)),
        median_rounds=med_rounds,
        hoeffding_rounds=n_hoeff,
        ratio=med_rounds / n_hoeff,
        fraction_within_epsilon=sum(r.error <= eps for r in records) / len(records),
    )


def write_curve(rows: Iterable[CurveRow], out: TextIO, metadata: dict | None = None) -> None:
    out.write(f"# tool: ebs-energy {__version__}\r\n")
    for k, v in (metadata or {}).items():
        out.write(f"# {k}: {_fmt(v)}\r\n")
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(CURVE_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in asdict(row).values()])

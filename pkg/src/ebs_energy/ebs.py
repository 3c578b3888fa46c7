"""Empirical Bernstein stopping with geometric checks and a Hoeffding round cap."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .estimators import EnergySample, summarize_values

BERNSTEIN = "bernstein"
HOEFFDING_CAP = "hoeffding_cap"
FIXED_BUDGET = "fixed_budget"

BLOCK = 1 << 18


class ScheduleError(ValueError):
    """The round cap leaves no room for a single check at or above ``min_samples``."""


def default_cap(epsilon: float, delta: float, value_range: float) -> int:
    # Hoeffding budget for samples spanning ``value_range`` (= 2 * one-norm)
    half = value_range / 2.0
    return math.ceil(2.0 / epsilon**2 * half**2 * math.log(2.0 / delta))


@dataclass(frozen=True)
class EBSConfig:
    epsilon: float
    delta: float
    value_range: float
    beta: float = 1.1
    min_samples: int = 10
    cap_rounds: int | None = None

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if not 0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta!r}")
        if not (self.beta > 1 and math.isfinite(self.beta)):
            raise ValueError(f"beta must exceed 1, got {self.beta!r}")
        if not (self.value_range > 0 and math.isfinite(self.value_range)):
            raise ValueError(f"range must be positive, got {self.value_range!r}")
        if self.min_samples < 1:
            raise ValueError("min_samples must be positive")
        if self.cap_rounds is None:
            object.__setattr__(
                self, "cap_rounds", default_cap(self.epsilon, self.delta, self.value_range)
            )
        if self.cap_rounds < 1:
            raise ValueError("cap_rounds must be positive")


@dataclass
class RunningStats:
    """Running mean and centred sum of squares (Welford, with Chan's batch merge).

    ``variance`` divides by ``count``, not ``count - 1``.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    def merge(self, count: int, mean: float, m2: float) -> None:
        if count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = count, mean, m2
            return
        total = self.count + count
        d = mean - self.mean
        self.mean += d * count / total
        self.m2 += m2 + d * d * self.count * count / total
        self.count = total

    def extend(self, values) -> None:
        self.merge(*summarize_values(values))

    @property
    def variance(self) -> float:
        if self.count == 0:
            raise ValueError("no samples")
        return max(self.m2, 0.0) / self.count

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def bernstein_radius(stats: RunningStats, value_range: float, x: float) -> float:
    """``std * sqrt(2x / N) + 3 R x / N`` for the current running statistics."""
    if stats.count == 0:
        raise ValueError("radius undefined for zero samples")
    n = stats.count
    return stats.std * math.sqrt(2.0 * x / n) + 3.0 * value_range * x / n


@dataclass(frozen=True)
class Check:
    k: int
    n: int
    alpha: float
    d: float

    @property
    def x(self) -> float:
        return -self.alpha * math.log(self.d / 3.0)


@dataclass(frozen=True)
class CheckSchedule:
    """Geometric check points ``floor(beta**k)`` for ``k0 <= k <= K``.

    Every index in the range receives the same share of ``delta``; indices
    whose point repeats the previous one are listed in ``skipped`` and
    never evaluated.
    """

    k0: int
    K: int
    beta: float
    checks: tuple[Check, ...]
    skipped: tuple[int, ...]
    partial_delta: float

    @property
    def check_points(self) -> tuple[int, ...]:
        return tuple(c.n for c in self.checks)

    @property
    def n_indices(self) -> int:
        return self.K - self.k0 + 1


def _floor_pow(beta: float, k: int) -> int:
    return math.floor(beta**k)


def build_schedule(config: EBSConfig, rounds_per_sample: int) -> CheckSchedule:
    if rounds_per_sample < 1:
        raise ValueError("rounds_per_sample must be positive")
    beta = config.beta
    k0 = 0
    while beta**k0 < config.min_samples:
        k0 += 1
    if rounds_per_sample * _floor_pow(beta, k0) > config.cap_rounds:
        raise ScheduleError(
            f"cap of {config.cap_rounds} rounds cannot reach {config.min_samples} samples "
            f"at {rounds_per_sample} rounds per sample"
        )
    K = k0
    while rounds_per_sample * _floor_pow(beta, K + 1) <= config.cap_rounds:
        K += 1
    d = config.delta / (K - k0 + 1)
    checks = []
    skipped = []
    last = None
    for k in range(k0, K + 1):
        point = _floor_pow(beta, k)
        if point == last:
            skipped.append(k)
            continue
        prev = _floor_pow(beta, k - 1) if k > 0 else 0
        alpha = point / prev if prev > 0 else 1.0
        checks.append(Check(k, point, alpha, d))
        last = point
    return CheckSchedule(k0, K, beta, tuple(checks), tuple(skipped), d)


@dataclass
class EstimationResult:
    estimate: float
    samples_used: int
    rounds_used: int
    terminated_by: str
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    std: float = float("nan")


class Source(Protocol):
    rounds_cost: int

    def draw(self, size: int) -> np.ndarray: ...


class CallableSource:
    """Adapts a zero-argument callable returning :class:`EnergySample`."""

    def __init__(self, fn: Callable[[], EnergySample]):
        self.fn = fn
        first = fn()
        self.rounds_cost = first.rounds_cost
        self._pending = [first.value]

    def draw(self, size: int) -> np.ndarray:
        out = self._pending[:size]
        self._pending = self._pending[size:]
        while len(out) < size:
            s = self.fn()
            if s.rounds_cost != self.rounds_cost:
                raise ValueError("sample source changed its rounds cost")
            out.append(s.value)
        return np.array(out, dtype=float)


def _as_source(source) -> Source:
    if hasattr(source, "draw") and hasattr(source, "rounds_cost"):
        return source
    if callable(source):
        return CallableSource(source)
    raise TypeError("source must provide draw(size) and rounds_cost, or be a callable")


def _advance(source, stats: RunningStats, target: int) -> None:
    summarize = getattr(source, "summarize", None)
    while stats.count < target:
        m = min(target - stats.count, BLOCK)
        if summarize is not None:
            stats.merge(*summarize(m))
        else:
            stats.extend(source.draw(m))


def run_ebs(source, config: EBSConfig) -> EstimationResult:
    """Sample until the empirical Bernstein radius drops to ``config.epsilon``.

    Checks happen only at the schedule points. If no check passes, sampling
    continues up to ``cap_rounds`` measurement rounds and the running mean is
    returned with ``terminated_by == "hoeffding_cap"``.
    """
    source = _as_source(source)
    rps = source.rounds_cost
    schedule = build_schedule(config, rps)
    stats = RunningStats()
    trajectory: list[tuple[int, float]] = []
    for check in schedule.checks:
        _advance(source, stats, check.n)
        radius = bernstein_radius(stats, config.value_range, check.x)
        trajectory.append((check.n, radius))
        if radius <= config.epsilon:
            return EstimationResult(
                stats.mean, stats.count, stats.count * rps, BERNSTEIN, trajectory, stats.std
            )
    _advance(source, stats, config.cap_rounds // rps)
    return EstimationResult(
        stats.mean, stats.count, stats.count * rps, HOEFFDING_CAP, trajectory, stats.std
    )


def run_fixed(source, n_samples: int, terminated_by: str = FIXED_BUDGET) -> EstimationResult:
    """Plain average of ``n_samples`` draws (the non-adaptive baseline)."""
    source = _as_source(source)
    if n_samples < 1:
        raise ValueError("need at least one sample")
    stats = RunningStats()
    _advance(source, stats, n_samples)
    return EstimationResult(
        stats.mean, stats.count, stats.count * source.rounds_cost, terminated_by, [], stats.std
    )

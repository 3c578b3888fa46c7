"""Energy samples from grouped and single-shot readouts, and the Hoeffding budget.

``grouped_sample`` and ``single_shot_sample`` are the literal one-draw
procedures. The ``*Estimator`` classes precompute per-outcome lookup tables so
long runs can draw many samples per numpy call; they consume the generator in
the same order as the one-draw functions where that is possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grouping import Grouping, MeasurementBasis
from .pauli import Hamiltonian, eval_outcome, eval_outcome_index, one_norm
from .simulator import (
    BasisDistribution,
    StateVector,
    basis_distribution,
    group_distributions,
    sample,
)


@dataclass(frozen=True)
class EnergySample:
    value: float
    rounds_cost: int


def hoeffding_rounds(h: Hamiltonian | float, epsilon: float, delta: float) -> int:
    """Measurement rounds after which the single-shot mean is epsilon-accurate w.p. 1 - delta.

    ``h`` may be a Hamiltonian or its one-norm.
    """
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta!r}")
    norm = h if isinstance(h, (int, float)) else one_norm(h)
    return math.ceil(2.0 / epsilon**2 * norm**2 * math.log(2.0 / delta))


def grouped_sample(
    h: Hamiltonian,
    grouping: Grouping,
    caches: list[BasisDistribution],
    rng: np.random.Generator,
) -> EnergySample:
    """One energy sample: measure every group once and combine member outcomes."""
    if len(caches) != len(grouping):
        raise ValueError("need exactly one distribution per group")
    covered = sorted(i for g in grouping for i in g.members)
    if covered != list(range(len(h.terms))):
        raise ValueError("grouping does not partition the Hamiltonian terms")
    outcomes = [0] * len(h.terms)
    for group, dist in zip(grouping, caches):
        if dist.basis != group.basis:
            raise ValueError(f"cache basis {dist.basis} does not match group basis {group.basis}")
        bits = sample(dist, rng)
        for i in group.members:
            outcomes[i] = eval_outcome(h.terms[i][1], bits)
    value = h.offset + sum(c * o for (c, _), o in zip(h.terms, outcomes))
    return EnergySample(value, len(grouping))


def term_distributions(state: StateVector, h: Hamiltonian) -> list[BasisDistribution]:
    """Readout distribution of each term measured on its own (free qubits read in Z)."""
    return [
        basis_distribution(
            state, MeasurementBasis(tuple("Z" if a == "I" else a for a in p.letters))
        )
        for _, p in h.terms
    ]


def term_cdf(h: Hamiltonian) -> np.ndarray:
    weights = np.abs(h.coefficients)
    cdf = np.cumsum(weights / weights.sum())
    cdf[-1] = 1.0
    return cdf


def single_shot_sample(
    h: Hamiltonian,
    caches: list[BasisDistribution],
    rng: np.random.Generator,
    cdf: np.ndarray | None = None,
) -> EnergySample:
    """Pick one term with probability ``|h_k| / sum |h|``, measure it, rescale."""
    if cdf is None:
        cdf = term_cdf(h)
    k = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(h.terms) - 1)
    coeff, p = h.terms[k]
    outcome = eval_outcome(p, sample(caches[k], rng))
    return EnergySample(h.offset + math.copysign(1.0, coeff) * outcome * one_norm(h), 1)


class GroupedEstimator:
    """Vectorised grouped sampling from a fixed state.

    ``tables[g][o]`` is the energy contribution of group ``g`` when its
    readout is basis index ``o``.
    """

    def __init__(self, h: Hamiltonian, grouping: Grouping, caches: list[BasisDistribution]):
        self.h = h
        self.grouping = grouping
        self.caches = caches
        self.offset = h.offset
        self.rounds_cost = len(grouping)
        self.value_range = 2.0 * one_norm(h)
        outcomes = np.arange(1 << h.n, dtype=np.int64)
        tables = []
        for group in grouping:
            t = np.zeros(outcomes.size)
            for i in group.members:
                c, p = h.terms[i]
                t += c * eval_outcome_index(p, outcomes)
            tables.append(t)
        self.tables = tables

    @classmethod
    def from_state(cls, h: Hamiltonian, grouping: Grouping, state: StateVector) -> GroupedEstimator:
        return cls(h, grouping, group_distributions(state, grouping))

    def sample(self, rng: np.random.Generator) -> EnergySample:
        return grouped_sample(self.h, self.grouping, self.caches, rng)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random((size, self.rounds_cost))
        values = np.full(size, self.offset)
        for g, (dist, table) in enumerate(zip(self.caches, self.tables)):
            values += table[dist.indices_from_uniform(u[:, g])]
        return values

    def mean(self) -> float:
        return self.offset + sum(
            float(dist.probabilities @ table) for dist, table in zip(self.caches, self.tables)
        )

    def variance(self) -> float:
        total = 0.0
        for dist, table in zip(self.caches, self.tables):
            m = dist.probabilities @ table
            total += float(dist.probabilities @ (table - m) ** 2)
        return total


class SingleShotEstimator:
    """Vectorised single-shot sampling.

    Each draw yields ``offset +/- one_norm``, so a batch is summarised exactly by
    the number of ``+`` results.
    """

    rounds_cost = 1

    def __init__(self, h: Hamiltonian, caches: list[BasisDistribution]):
        self.h = h
        self.caches = caches
        self.offset = h.offset
        self.norm = one_norm(h)
        self.value_range = 2.0 * self.norm
        self.cdf = term_cdf(h)
        self.term_probs = np.abs(h.coefficients) / self.norm
        outcomes = np.arange(1 << h.n, dtype=np.int64)
        signs = np.sign(h.coefficients)
        # probability that sign(h_k) * outcome_k == +1
        self.p_plus = np.array(
            [
                float(dist.probabilities @ (signs[k] * eval_outcome_index(p, outcomes) > 0))
                for k, ((_, p), dist) in enumerate(zip(h.terms, caches))
            ]
        )
        self.q_plus = float(np.clip(self.term_probs @ self.p_plus, 0.0, 1.0))

    @classmethod
    def from_state(cls, h: Hamiltonian, state: StateVector) -> SingleShotEstimator:
        return cls(h, term_distributions(state, h))

    @classmethod
    def from_grouping(
        cls, h: Hamiltonian, grouping: Grouping, caches: list[BasisDistribution]
    ) -> SingleShotEstimator:
        """Reuse group readouts: a term's marginal is the same in any compatible basis."""
        owner = grouping.group_of()
        return cls(h, [caches[owner[i]] for i in range(len(h.terms))])

    def sample(self, rng: np.random.Generator) -> EnergySample:
        return single_shot_sample(self.h, self.caches, rng, self.cdf)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random((size, 2))
        k = np.minimum(np.searchsorted(self.cdf, u[:, 0], side="right"), len(self.h.terms) - 1)
        s = np.where(u[:, 1] < self.p_plus[k], 1.0, -1.0)
        return self.offset + s * self.norm

    def summarize(self, rng: np.random.Generator, size: int) -> tuple[int, float, float]:
        """(count, mean, sum of squared deviations) of ``size`` fresh draws."""
        plus = int(rng.binomial(size, self.q_plus))
        mean = self.offset + self.norm * (2.0 * plus - size) / size
        m2 = 4.0 * self.norm**2 * plus * (size - plus) / size
        return size, mean, m2

    def mean(self) -> float:
        return self.offset + self.norm * (2.0 * self.q_plus - 1.0)

    def variance(self) -> float:
        return 4.0 * self.norm**2 * self.q_plus * (1.0 - self.q_plus)


@dataclass
class SampleSource:
    """An estimator bound to its own generator; what the stopping rule pulls from."""

    estimator: GroupedEstimator | SingleShotEstimator
    rng: np.random.Generator

    @property
    def rounds_cost(self) -> int:
        return self.estimator.rounds_cost

    @property
    def value_range(self) -> float:
        return self.estimator.value_range

    def __call__(self) -> EnergySample:
        return self.estimator.sample(self.rng)

    def draw(self, size: int) -> np.ndarray:
        return self.estimator.draw(self.rng, size)

    def summarize(self, size: int) -> tuple[int, float, float]:
        if hasattr(self.estimator, "summarize"):
            return self.estimator.summarize(self.rng, size)
        return summarize_values(self.draw(size))


def summarize_values(values: np.ndarray) -> tuple[int, float, float]:
    """Count, mean and centred sum of squares, shifted by the first value for stability."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0, 0.0, 0.0
    shift = values[0]
    d = values - shift
    md = d.mean()
    return values.size, float(shift + md), float(np.sum((d - md) ** 2))

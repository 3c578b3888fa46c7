import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebs_energy.estimators import (
    GroupedEstimator,
    SampleSource,
    SingleShotEstimator,
    grouped_sample,
    hoeffding_rounds,
    single_shot_sample,
    summarize_values,
    term_distributions,
)
from ebs_energy.grouping import greedy_group
from ebs_energy.pauli import eval_outcome, index_to_bits, one_norm, parse_hamiltonian
from ebs_energy.simulator import (
    StateVector,
    energy,
    exact_estimator_variance,
    group_distributions,
    ground_state,
    random_state,
)

from conftest import random_hamiltonian
from oracles import dense_hamiltonian, two_pass_variance


def _oracle_energy(h, state):
    dense = dense_hamiltonian([(c, p.letters) for c, p in h.terms], h.offset)
    psi = state.amplitudes
    return float(np.vdot(psi, dense @ psi).real)


def _instance(seed, n=3, m=8):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, n, m)
    return h, greedy_group(h), random_state(n, rng)


def test_grouped_eigenstate_deterministic(rng):
    h = parse_hamiltonian("1.0 Z")
    g = greedy_group(h)
    caches = group_distributions(StateVector.basis_state("0"), g)
    for _ in range(50):
        s = grouped_sample(h, g, caches, rng)
        assert s.value == 1.0 and s.rounds_cost == 1


def test_grouped_h2_rounds_cost(h2, rng):
    g = greedy_group(h2)
    _, state = ground_state(h2)
    caches = group_distributions(state, g)
    assert {grouped_sample(h2, g, caches, rng).rounds_cost for _ in range(20)} == {3}


def test_grouped_rejects_mismatched_caches(h2, rng):
    g = greedy_group(h2)
    caches = group_distributions(StateVector.basis_state("00"), g)
    with pytest.raises(ValueError):
        grouped_sample(h2, g, caches[:-1], rng)
    with pytest.raises(ValueError):
        grouped_sample(h2, g, caches[::-1], rng)


def test_single_shot_eigenstate(rng):
    h = parse_hamiltonian("1.0 Z")
    caches = term_distributions(StateVector.basis_state("0"), h)
    assert all(single_shot_sample(h, caches, rng).value == 1.0 for _ in range(50))


@pytest.mark.parametrize("seed", range(5))
def test_sample_ranges(seed):
    h, g, state = _instance(seed)
    rng = np.random.default_rng(seed)
    norm = one_norm(h)
    grouped = GroupedEstimator.from_state(h, g, state)
    single = SingleShotEstimator.from_state(h, state)
    for _ in range(200):
        assert abs(grouped.sample(rng).value - h.offset) <= norm * (1 + 1e-12)
        assert abs(single.sample(rng).value - h.offset) == pytest.approx(norm, rel=1e-14)
    assert np.all(np.abs(grouped.draw(rng, 1000) - h.offset) <= norm * (1 + 1e-12))
    assert np.allclose(np.abs(single.draw(rng, 1000) - h.offset), norm, rtol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_grouped_unbiased_exhaustive(seed):
    h, g, state = _instance(seed)
    caches = group_distributions(state, g)
    n = h.n
    # joint outcome tensor over all groups: exact expectation of one sample
    prob = np.ones(())
    value = np.full((), h.offset)
    for group, dist in zip(g, caches):
        vals = np.array([
            sum(h.terms[i][0] * eval_outcome(h.terms[i][1], index_to_bits(o, n)) for i in group.members)
            for o in range(1 << n)
        ])
        prob = np.multiply.outer(prob, dist.probabilities)
        value = np.add.outer(value, vals)
    assert prob.size == (1 << n) ** len(g)
    total = float(np.sum(prob * value))
    assert total == pytest.approx(_oracle_energy(h, state), abs=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_single_shot_unbiased_exhaustive(seed):
    h, _, state = _instance(seed)
    caches = term_distributions(state, h)
    norm = one_norm(h)
    total = h.offset
    for k, ((c, p), dist) in enumerate(zip(h.terms, caches)):
        for o in range(1 << h.n):
            value = math.copysign(1.0, c) * eval_outcome(p, index_to_bits(o, h.n)) * norm
            total += abs(c) / norm * dist.probabilities[o] * value
    assert total == pytest.approx(_oracle_energy(h, state), abs=1e-10)
    est = SingleShotEstimator.from_state(h, state)
    assert est.mean() == pytest.approx(total, abs=1e-10)


def test_single_shot_from_grouping_matches_from_state():
    h, g, state = _instance(3)
    a = SingleShotEstimator.from_state(h, state)
    b = SingleShotEstimator.from_grouping(h, g, group_distributions(state, g))
    assert np.allclose(a.p_plus, b.p_plus, atol=1e-12)


def test_grouped_monte_carlo_matches_oracles():
    h, g, state = _instance(11)
    est = GroupedEstimator.from_state(h, g, state)
    values = est.draw(np.random.default_rng(5), 1_000_000)
    e = energy(state, h)
    var = exact_estimator_variance(state, h, g)
    se = math.sqrt(var / values.size)
    assert abs(values.mean() - e) <= 4 * se
    # SE of the sample variance: sqrt((mu4 - var^2) / N)
    mu4 = np.mean((values - values.mean()) ** 4)
    assert abs(values.var() - var) <= 3 * math.sqrt((mu4 - var**2) / values.size)
    assert est.mean() == pytest.approx(e, abs=1e-10)
    assert est.variance() == pytest.approx(var, rel=1e-9, abs=1e-14)


def test_single_shot_monte_carlo_matches_oracle():
    h, _, state = _instance(12)
    est = SingleShotEstimator.from_state(h, state)
    values = est.draw(np.random.default_rng(6), 1_000_000)
    se = math.sqrt(est.variance() / values.size)
    assert abs(values.mean() - energy(state, h)) <= 4 * se


def test_vectorised_draw_replays_single_draws():
    h, g, state = _instance(4)
    est = GroupedEstimator.from_state(h, g, state)
    rng = np.random.default_rng(77)
    singles = [est.sample(rng).value for _ in range(200)]
    batch = est.draw(np.random.default_rng(77), 200)
    assert np.allclose(singles, batch, atol=1e-12, rtol=0)


def test_single_shot_summary_is_consistent():
    h, _, state = _instance(8)
    est = SingleShotEstimator.from_state(h, state)
    count, mean, m2 = est.summarize(np.random.default_rng(1), 10_000)
    assert count == 10_000
    plus = round((mean - h.offset) / est.norm * count + count) // 2
    assert m2 == pytest.approx(4 * est.norm**2 * plus * (count - plus) / count, rel=1e-9)
    assert abs(mean - est.mean()) <= 5 * math.sqrt(est.variance() / count)


def test_sample_source_protocol(h2):
    _, state = ground_state(h2)
    est = GroupedEstimator.from_state(h2, greedy_group(h2), state)
    src = SampleSource(est, np.random.default_rng(0))
    assert src.rounds_cost == 3 and src.value_range == pytest.approx(2 * one_norm(h2))
    assert src().rounds_cost == 3
    assert src.summarize(100)[0] == 100


def test_summarize_values_shift_stable():
    rng = np.random.default_rng(0)
    values = rng.uniform(-1, 1, 100_000) + 1e8
    count, mean, m2 = summarize_values(values)
    assert m2 / count == pytest.approx(two_pass_variance(values - 1e8), rel=1e-6)


def test_hoeffding_examples():
    assert hoeffding_rounds(1.0, 0.1, 0.1) == 600
    assert hoeffding_rounds(1.0, 1.0, 0.1) == 6
    assert hoeffding_rounds(parse_hamiltonian("0.5 X\n-0.5 Z"), 0.1, 0.1) == 600


@given(
    st.floats(0.01, 10.0),
    st.floats(1e-3, 1.0),
    st.floats(0.01, 0.49),
)
@settings(max_examples=60, deadline=None)
def test_hoeffding_quadruples(norm, eps, delta):
    base = 2.0 / eps**2 * norm**2 * math.log(2.0 / delta)
    assert hoeffding_rounds(norm, eps, delta) == math.ceil(base)
    assert abs(hoeffding_rounds(2 * norm, eps, delta) - 4 * base) <= 1


@pytest.mark.parametrize("eps, delta", [(0.0, 0.1), (-1.0, 0.1), (0.1, 0.0), (0.1, 0.5), (0.1, 0.7)])
def test_hoeffding_domain(eps, delta):
    with pytest.raises(ValueError):
        hoeffding_rounds(1.0, eps, delta)


def test_hoeffding_coverage():
    h, _, state = _instance(21, n=3, m=6)
    est = SingleShotEstimator.from_state(h, state)
    eps = 0.3 * one_norm(h)
    n = hoeffding_rounds(h, eps, 0.1)
    rng = np.random.default_rng(2)
    truth = energy(state, h)
    failures = sum(abs(est.summarize(rng, n)[1] - truth) > eps for _ in range(2000))
    assert failures / 2000 <= 0.1

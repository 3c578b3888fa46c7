import itertools

import numpy as np
import pytest

from ebs_energy.grouping import MeasurementBasis, greedy_group
from ebs_energy.pauli import Hamiltonian, PauliString, eval_outcome, index_to_bits, parse_hamiltonian
from ebs_energy.simulator import (
    BASIS_ROTATIONS,
    HamiltonianOperator,
    StateVector,
    basis_distribution,
    energy,
    exact_estimator_variance,
    expectation,
    ground_state,
    random_state,
    rotate_to_basis,
    sample,
)

from conftest import random_hamiltonian, random_pauli
from oracles import dense_hamiltonian, dense_pauli


def _terms(h):
    return [(c, p.letters) for c, p in h.terms]


def test_ground_state_z():
    e, state = ground_state(parse_hamiltonian("1.0 Z"))
    assert e == pytest.approx(-1.0, abs=1e-10)
    assert abs(state.amplitudes[1]) == pytest.approx(1.0, abs=1e-8)


def test_ground_state_x():
    e, state = ground_state(parse_hamiltonian("1.0 X"))
    assert e == pytest.approx(-1.0, abs=1e-10)
    target = np.array([1, -1]) / np.sqrt(2)
    assert abs(np.vdot(target, state.amplitudes)) == pytest.approx(1.0, abs=1e-8)


def test_ground_state_includes_offset():
    e, _ = ground_state(parse_hamiltonian("-2.5 II\n1.0 ZZ"))
    assert e == pytest.approx(-3.5, abs=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_ground_state_matches_dense(seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, 4, 12)
    e, state = ground_state(h)
    dense = dense_hamiltonian(_terms(h), h.offset)
    assert e == pytest.approx(np.linalg.eigvalsh(dense)[0], abs=1e-8)
    psi = state.amplitudes
    scale = sum(abs(c) for c, _ in h.terms)
    assert np.linalg.norm(dense @ psi - e * psi) <= 1e-8 * scale


def test_ground_state_larger_register():
    rng = np.random.default_rng(7)
    h = random_hamiltonian(rng, 8, 40)
    e, state = ground_state(h)
    dense = dense_hamiltonian(_terms(h), h.offset)
    assert e == pytest.approx(np.linalg.eigvalsh(dense)[0], abs=1e-8)


def test_ground_state_diagonal_is_exact(rng):
    h = Hamiltonian.from_terms([(0.3, "ZIZ"), (-0.7, "IZI"), (0.2, "ZZZ")], offset=0.1)
    e, state = ground_state(h)
    assert e == pytest.approx(np.linalg.eigvalsh(dense_hamiltonian(_terms(h), h.offset))[0], abs=1e-12)
    assert np.count_nonzero(state.amplitudes) == 1
    assert ground_state(parse_hamiltonian("1.0 Z"))[0] == -1.0


def test_ground_state_qubit_cap():
    h = Hamiltonian.from_terms([(1.0, "Z" * 17)])
    with pytest.raises(ValueError):
        ground_state(h)


def test_ground_state_variational_bound(h2):
    e, _ = ground_state(h2)
    rng = np.random.default_rng(3)
    for _ in range(100):
        theta, phi = rng.uniform(0, np.pi, 2), rng.uniform(0, 2 * np.pi, 2)
        qubits = [np.array([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)]) for t, f in zip(theta, phi)]
        state = StateVector(2, np.kron(*qubits))
        assert e <= energy(state, h2) + 1e-12


def test_hamiltonian_operator_matches_dense(rng):
    h = random_hamiltonian(rng, 3, 10)
    psi = random_state(3, rng).amplitudes
    dense = dense_hamiltonian(_terms(h))
    assert np.allclose(HamiltonianOperator(h)(psi), dense @ psi, atol=1e-12)


def test_expectation_examples():
    zero = StateVector.basis_state("0")
    assert expectation(zero, PauliString.from_label("Z")) == pytest.approx(1.0)
    assert expectation(zero, PauliString.from_label("X")) == pytest.approx(0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_expectation_matches_dense(n, rng):
    for _ in range(10):
        state = random_state(n, rng)
        p = random_pauli(rng, n)
        psi = state.amplitudes
        expected = np.vdot(psi, dense_pauli(p.letters) @ psi).real
        assert expectation(state, p) == pytest.approx(expected, abs=1e-10)


def test_expectation_length_mismatch():
    with pytest.raises(ValueError):
        expectation(StateVector.basis_state("00"), PauliString.from_label("Z"))


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        StateVector(1, np.array([1.0, 1.0]))


def test_basis_distribution_examples():
    zero = StateVector.basis_state("0")
    assert np.allclose(basis_distribution(zero, MeasurementBasis.from_label("Z")).probabilities, [1, 0])
    assert np.allclose(basis_distribution(zero, MeasurementBasis.from_label("X")).probabilities, [0.5, 0.5])


def test_basis_distribution_requires_finalized_basis():
    with pytest.raises(ValueError):
        basis_distribution(StateVector.basis_state("0"), MeasurementBasis.free(1))


def test_y_rotation_order_reproduces_y_expectation():
    # |+i> has <Y> = +1, so it must always read as the +1 outcome
    plus_i = StateVector(1, np.array([1, 1j]) / np.sqrt(2))
    dist = basis_distribution(plus_i, MeasurementBasis.from_label("Y"))
    assert dist.probabilities[0] == pytest.approx(1.0, abs=1e-12)
    # the reversed order (H first, then S^dagger) would read X instead
    wrong = np.diag([1, -1j]) @ BASIS_ROTATIONS["X"]
    assert abs((wrong @ plus_i.amplitudes)[0]) ** 2 == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    for _ in range(20):
        state = random_state(1, rng)
        d = basis_distribution(state, MeasurementBasis.from_label("Y"))
        assert d.probabilities[0] - d.probabilities[1] == pytest.approx(
            expectation(state, PauliString.from_label("Y")), abs=1e-12
        )


def test_rotations_are_unitary(rng):
    for u in BASIS_ROTATIONS.values():
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    state = random_state(4, rng)
    for basis in itertools.product("XYZ", repeat=4):
        psi = rotate_to_basis(state, MeasurementBasis(basis))
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", [3, 4])
def test_outcome_average_equals_expectation_exhaustive(n, rng):
    state = random_state(n, rng)
    for basis in itertools.product("XYZ", repeat=n):
        dist = basis_distribution(state, MeasurementBasis(basis))
        assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(dist.cumulative) >= 0) and dist.cumulative[-1] == 1.0
        # every string compatible with this basis: choose I or the basis letter per qubit
        for mask in itertools.product([False, True], repeat=n):
            letters = "".join(b if keep else "I" for b, keep in zip(basis, mask))
            p = PauliString.from_label(letters)
            avg = sum(dist.probabilities[o] * eval_outcome(p, index_to_bits(o, n)) for o in range(2**n))
            assert avg == pytest.approx(expectation(state, p), abs=1e-10)


def test_sample_deterministic_distribution(rng):
    state = StateVector.basis_state("000")
    dist = basis_distribution(state, MeasurementBasis.from_label("ZZZ"))
    assert all(sample(dist, rng) == (1, 1, 1) for _ in range(100))


def test_sample_z_eigenstate_10(rng):
    dist = basis_distribution(StateVector.basis_state("10"), MeasurementBasis.from_label("ZZ"))
    assert all(sample(dist, rng) == (-1, 1) for _ in range(100))


def test_sample_uniform_frequencies(rng):
    dist = basis_distribution(StateVector.basis_state("0"), MeasurementBasis.from_label("X"))
    draws = dist.sample_indices(rng, 100_000)
    assert abs(np.mean(draws == 0) - 0.5) <= 0.01


def test_sample_never_picks_zero_probability_outcomes(rng):
    state = StateVector.from_amplitudes([1, 0, 0, 1])
    dist = basis_distribution(state, MeasurementBasis.from_label("ZZ"))
    draws = dist.sample_indices(rng, 50_000)
    assert set(np.unique(draws)) == {0, 3}
    assert dist.indices_from_uniform(np.nextafter(1.0, 0.0)) == 3


def test_scalar_and_batch_draws_share_the_stream():
    dist = basis_distribution(random_state(3, np.random.default_rng(1)), MeasurementBasis.from_label("XYZ"))
    a, b = np.random.default_rng(9), np.random.default_rng(9)
    singles = [int(dist.indices_from_uniform(a.random())) for _ in range(50)]
    assert singles == list(dist.sample_indices(b, 50))


def test_variance_zero_for_eigenstate():
    h = parse_hamiltonian("0.5 ZI\n-0.3 IZ\n0.2 ZZ")
    state = StateVector.basis_state("00")
    assert exact_estimator_variance(state, h, greedy_group(h)) == pytest.approx(0.0, abs=1e-15)


def test_variance_single_term(rng):
    h = parse_hamiltonian("0.7 XYZ")
    state = random_state(3, rng)
    o = expectation(state, h.terms[0][1])
    assert exact_estimator_variance(state, h, greedy_group(h)) == pytest.approx(0.49 * (1 - o**2), rel=1e-12)


def test_variance_matches_outcome_distribution_enumeration(rng):
    # independent check: enumerate each group's outcome distribution directly
    h = random_hamiltonian(rng, 3, 10)
    state = random_state(3, rng)
    grouping = greedy_group(h)
    total = 0.0
    for g in grouping:
        dist = basis_distribution(state, g.basis)
        vals = np.array([
            sum(h.terms[i][0] * eval_outcome(h.terms[i][1], index_to_bits(o, 3)) for i in g.members)
            for o in range(8)
        ])
        mean = dist.probabilities @ vals
        total += dist.probabilities @ (vals - mean) ** 2
    assert exact_estimator_variance(state, h, grouping) == pytest.approx(total, rel=1e-10, abs=1e-14)

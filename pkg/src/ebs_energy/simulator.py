"""Statevector simulation: ground states, Pauli expectations and Born-rule sampling.

Everything is matrix-free. A Pauli string acts on a basis index ``i`` as
``P|i> = i^{#Y} (-1)^{popcount(i & z)} |i ^ x>``, which is all the
Hamiltonian action and expectation code needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grouping import Grouping, MeasurementBasis
from .pauli import Hamiltonian, PauliString, eval_outcome_index, index_to_bits, one_norm, qwc_product

MAX_QUBITS = 16
NORM_TOL = 1e-10

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF
_S_DAG = np.diag([1.0, -1.0j])
# basis change applied before a computational-basis readout
BASIS_ROTATIONS = {
    "X": _HADAMARD,
    "Y": _HADAMARD @ _S_DAG,  # S^dagger first, then H
    "Z": np.eye(2, dtype=complex),
}


class SimulationError(RuntimeError):
    """Numerical failure inside the simulator (e.g. eigensolver did not converge)."""


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amps, normalize: bool = True) -> StateVector:
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(amps.size)))
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def basis_state(cls, bits: str) -> StateVector:
        """Computational basis state from a bit label such as ``"10"`` (qubit 0 first)."""
        n = len(bits)
        amps = np.zeros(1 << n, dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(n, amps)


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector.from_amplitudes(amps)


def _indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def pauli_phases(p: PauliString) -> np.ndarray:
    """Phase picked up by each basis index ``i`` under ``p`` (before the bit flip)."""
    idx = _indices(p.n)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & p.z) & 1)
    return signs * (1j ** (p.y_count % 4))


def apply_pauli(p: PauliString, psi: np.ndarray) -> np.ndarray:
    idx = _indices(p.n)
    flipped = idx ^ p.x
    phased = pauli_phases(p) * psi
    out = np.empty_like(phased)
    out[flipped] = phased
    return out


def expectation(state: StateVector, p: PauliString) -> float:
    """<state| p |state>."""
    if p.n != state.n:
        raise ValueError(f"qubit count mismatch: {p.n} != {state.n}")
    psi = state.amplitudes
    idx = _indices(p.n)
    # <psi| P |psi> = sum_i conj(psi[i ^ x]) * phase(i) * psi[i]
    val = np.sum(np.conj(psi[idx ^ p.x]) * pauli_phases(p) * psi)
    return float(val.real)


def energy(state: StateVector, h: Hamiltonian) -> float:
    """Exact ``Tr[rho H]`` including the identity offset."""
    return h.offset + sum(c * expectation(state, p) for c, p in h.terms)


class HamiltonianOperator:
    """Matrix-free action of the non-identity part of ``h``.

    Terms sharing an x-mask share a permutation, so their phases are folded
    into one diagonal per distinct mask.
    """

    def __init__(self, h: Hamiltonian):
        self.n = h.n
        self.dim = 1 << h.n
        idx = _indices(h.n)
        diagonals: dict[int, np.ndarray] = {}
        for c, p in h.terms:
            d = diagonals.setdefault(p.x, np.zeros(self.dim, dtype=complex))
            d += c * pauli_phases(p)
        self._blocks = [(idx ^ x, d) for x, d in sorted(diagonals.items())]

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for flipped, d in self._blocks:
            out[flipped] += d * psi
        return out


def _lanczos_cycle(apply, v0: np.ndarray, max_basis: int, budget: int):
    """One Lanczos cycle with full reorthogonalisation. Returns (theta, ritz, matvecs)."""
    dim = v0.size
    basis = np.zeros((max_basis, dim), dtype=complex)
    basis[0] = v0
    alphas: list[float] = []
    betas: list[float] = []
    used = 0
    for j in range(max_basis):
        w = apply(basis[j])
        used += 1
        a = float(np.vdot(basis[j], w).real)
        alphas.append(a)
        w = w - a * basis[j]
        if j > 0:
            w = w - betas[-1] * basis[j - 1]
        for _ in range(2):
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        if j + 1 == max_basis or used >= budget or b <= 1e-12 * max(1.0, abs(a)):
            break
        betas.append(b)
        basis[j + 1] = w / b
    k = len(alphas)
    tri = np.diag(alphas) + np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
    evals, evecs = np.linalg.eigh(tri)
    ritz = evecs[:, 0] @ basis[:k]
    ritz /= np.linalg.norm(ritz)
    return float(evals[0]), ritz, used


def ground_state(
    h: Hamiltonian, seed: int = 0, max_basis: int = 64
) -> tuple[float, StateVector]:
    """Lowest eigenpair of ``h`` by restarted Lanczos.

    The returned energy includes ``h.offset``. Converged means
    ``||H psi - E psi|| <= 1e-8 * one_norm(h)``; the matvec budget is
    ``10 * 2**(n/2) + 200``.
    """
    if h.n > MAX_QUBITS:
        raise ValueError(f"{h.n} qubits exceeds the simulator cap of {MAX_QUBITS}")
    if all(p.x == 0 for _, p in h.terms):
        # diagonal in the computational basis: exact answer, no iteration
        idx = _indices(h.n)
        diag = sum(c * eval_outcome_index(p, idx) for c, p in h.terms)
        k = int(np.argmin(diag))
        e = h.offset + sum(c * eval_outcome_index(p, k) for c, p in h.terms)
        amps = np.zeros(1 << h.n, dtype=complex)
        amps[k] = 1.0
        return float(e), StateVector(h.n, amps)
    op = HamiltonianOperator(h)
    dim = op.dim
    tol = 1e-8 * one_norm(h)
    budget = int(10 * 2 ** (h.n / 2) + 200)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    used = 0
    while used < budget:
        _, v, spent = _lanczos_cycle(op, v, min(max_basis, dim), budget - used)
        used += spent
        hv = op(v)
        used += 1
        theta = float(np.vdot(v, hv).real)
        if np.linalg.norm(hv - theta * v) <= tol:
            # fix the global phase so output is deterministic
            k = int(np.argmax(np.abs(v)))
            v = v * (abs(v[k]) / v[k])
            return theta + h.offset, StateVector(h.n, v / np.linalg.norm(v))
    raise SimulationError(f"Lanczos did not converge within {budget} matvecs")


def rotate_to_basis(state: StateVector, basis: MeasurementBasis) -> np.ndarray:
    if not basis.finalized:
        raise ValueError(f"basis {basis} is not finalized")
    if basis.n != state.n:
        raise ValueError(f"qubit count mismatch: {basis.n} != {state.n}")
    psi = state.amplitudes.reshape((2,) * state.n)
    for j, letter in enumerate(basis.assignment):
        if letter == "Z":
            continue
        psi = np.moveaxis(np.tensordot(BASIS_ROTATIONS[letter], psi, axes=([1], [j])), 0, j)
    return psi.reshape(-1)


@dataclass(frozen=True, eq=False)
class BasisDistribution:
    """Outcome distribution of a full readout in ``basis``.

    Outcome index bit ``1`` on qubit ``j`` means the -1 eigenvalue was seen.
    """

    basis: MeasurementBasis
    probabilities: np.ndarray
    cumulative: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.n

    def sample_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.indices_from_uniform(rng.random(size))

    def indices_from_uniform(self, u) -> np.ndarray:
        idx = np.searchsorted(self.cumulative, u, side="right")
        return np.minimum(idx, self.cumulative.size - 1)


def basis_distribution(state: StateVector, basis: MeasurementBasis) -> BasisDistribution:
    amps = rotate_to_basis(state, basis)
    probs = np.abs(amps) ** 2
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise SimulationError(f"basis rotation lost normalization ({total!r})")
    probs = probs / total
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    probs.flags.writeable = False
    cum.flags.writeable = False
    return BasisDistribution(basis, probs, cum)


def sample(dist: BasisDistribution, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw one readout as a tuple of +/-1 per qubit."""
    idx = int(dist.indices_from_uniform(rng.random()))
    return index_to_bits(idx, dist.n)


def group_distributions(state: StateVector, grouping: Grouping) -> list[BasisDistribution]:
    return [basis_distribution(state, g.basis) for g in grouping]


def exact_estimator_variance(state: StateVector, h: Hamiltonian, grouping: Grouping) -> float:
    """Exact variance of one grouped energy sample.

    Groups are independent, so only covariances inside a group contribute;
    for QWC members the outcome product is the outcome of their letterwise
    product.
    """
    strings = h.strings
    coeffs = [c for c, _ in h.terms]
    o = [expectation(state, p) for p in strings]
    var = 0.0
    for group in grouping:
        for a in group.members:
            for b in group.members:
                prod = qwc_product(strings[a], strings[b])
                second = 1.0 if prod.is_identity() else expectation(state, prod)
                var += coeffs[a] * coeffs[b] * (second - o[a] * o[b])
    return max(var, 0.0)


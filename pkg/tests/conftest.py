from importlib import resources

import numpy as np
import pytest

from ebs_energy.pauli import Hamiltonian, PauliString, parse_hamiltonian


def data_path(name):
    return resources.files("ebs_energy") / "data" / name


@pytest.fixture(scope="session")
def h2_path():
    return str(data_path("h2_2q.txt"))


@pytest.fixture(scope="session")
def chain4_path():
    return str(data_path("chain4_weak.txt"))


@pytest.fixture(scope="session")
def h2(h2_path):
    with open(h2_path) as fh:
        return parse_hamiltonian(fh)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hamiltonian(rng, n, m, allow_identity=False) -> Hamiltonian:
    """Random Hamiltonian with up to ``m`` distinct non-identity terms."""
    terms = []
    for _ in range(m):
        letters = "".join(rng.choice(list("IXYZ"), size=n))
        if letters == "I" * n:
            letters = "Z" + letters[1:]
        terms.append((float(rng.uniform(-1, 1)), letters))
    return Hamiltonian.from_terms(terms)


def random_pauli(rng, n) -> PauliString:
    return PauliString.from_label("".join(rng.choice(list("IXYZ"), size=n)))

"""Disjoint qubit-wise commuting groups and their single-qubit measurement bases."""

from __future__ import annotations

from dataclasses import dataclass

from .pauli import Hamiltonian, PauliString

FREE = "-"
_BASIS_LETTERS = frozenset("XYZ")


@dataclass(frozen=True)
class MeasurementBasis:
    """Per-qubit Pauli measurement setting.

    ``assignment`` holds one of ``X``, ``Y``, ``Z`` per qubit, or ``FREE`` for
    slots no member has constrained yet.
    """

    assignment: tuple[str, ...]

    def __post_init__(self):
        for a in self.assignment:
            if a not in _BASIS_LETTERS and a != FREE:
                raise ValueError(f"invalid basis letter {a!r}")

    @classmethod
    def from_label(cls, label: str) -> MeasurementBasis:
        return cls(tuple(label))

    @classmethod
    def free(cls, n: int) -> MeasurementBasis:
        return cls((FREE,) * n)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def finalized(self) -> bool:
        return FREE not in self.assignment

    def admits(self, p: PauliString) -> bool:
        """Whether ``p`` fits this (possibly partial) basis."""
        if p.n != self.n:
            raise ValueError(f"qubit count mismatch: {p.n} != {self.n}")
        letters = p.letters
        return all(
            letters[j] == self.assignment[j] or self.assignment[j] == FREE
            for j in p.support
        )

    def extended(self, p: PauliString) -> MeasurementBasis:
        letters = p.letters
        new = list(self.assignment)
        for j in p.support:
            if new[j] not in (FREE, letters[j]):
                raise ValueError(f"{p} conflicts with basis {self}")
            new[j] = letters[j]
        return MeasurementBasis(tuple(new))

    def finalize(self) -> MeasurementBasis:
        return MeasurementBasis(tuple("Z" if a == FREE else a for a in self.assignment))

    def __str__(self) -> str:
        return "".join(self.assignment)


def compatible(p: PauliString, basis: MeasurementBasis) -> bool:
    """True iff every non-identity letter of ``p`` equals the basis letter there."""
    if p.n != basis.n:
        raise ValueError(f"qubit count mismatch: {p.n} != {basis.n}")
    letters = p.letters
    return all(letters[j] == basis.assignment[j] for j in p.support)


@dataclass(frozen=True)
class Group:
    members: tuple[int, ...]
    basis: MeasurementBasis


@dataclass(frozen=True)
class Grouping:
    groups: tuple[Group, ...]

    def __len__(self) -> int:
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def group_of(self) -> dict[int, int]:
        """Map term index -> group index."""
        return {i: g for g, grp in enumerate(self.groups) for i in grp.members}


def greedy_group(h: Hamiltonian) -> Grouping:
    """Sorted-insertion first-fit grouping.

    Terms are visited by decreasing ``|h_i|`` (ties: lower index first) and put
    into the first group whose partial basis admits them. Free basis slots
    default to ``Z`` at the end.
    """
    order = sorted(range(len(h.terms)), key=lambda i: (-abs(h.terms[i][0]), i))
    members: list[list[int]] = []
    bases: list[MeasurementBasis] = []
    for i in order:
        p = h.terms[i][1]
        for g, basis in enumerate(bases):
            if basis.admits(p):
                members[g].append(i)
                bases[g] = basis.extended(p)
                break
        else:
            members.append([i])
            bases.append(MeasurementBasis.free(h.n).extended(p))
    return Grouping(
        tuple(Group(tuple(sorted(m)), b.finalize()) for m, b in zip(members, bases))
    )


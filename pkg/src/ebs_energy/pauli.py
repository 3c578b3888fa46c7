"""Pauli strings, qubit Hamiltonians and the plain-text term format.

A string over ``{I, X, Y, Z}`` is stored as two integer bit masks. Qubit 0 is
the leftmost letter and maps to the most significant bit of a computational
basis index, so ``mask >> (n - 1 - j) & 1`` addresses qubit ``j``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}

# relative tolerance used when comparing coefficients
COEFF_RTOL = 1e-12


class HamiltonianParseError(ValueError):
    """Raised for malformed Hamiltonian text. Carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("qubit count must be positive")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("mask exceeds qubit count")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        label = label.strip().upper()
        if not label or any(c not in LETTERS for c in label):
            raise ValueError(f"invalid Pauli label {label!r}")
        n = len(label)
        x = z = 0
        for j, letter in enumerate(label):
            xb, zb = _LETTER_BITS[letter]
            shift = n - 1 - j
            x |= xb << shift
            z |= zb << shift
        return cls(n, x, z)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    @property
    def letters(self) -> str:
        out = []
        for j in range(self.n):
            shift = self.n - 1 - j
            out.append(_BITS_LETTER[((self.x >> shift) & 1, (self.z >> shift) & 1)])
        return "".join(out)

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.support_mask
        return tuple(j for j in range(self.n) if (mask >> (self.n - 1 - j)) & 1)

    @property
    def weight(self) -> int:
        return self.support_mask.bit_count()

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    def is_identity(self) -> bool:
        return self.support_mask == 0

    def __str__(self) -> str:
        return self.letters

    def __repr__(self) -> str:
        return f"PauliString({self.letters!r})"


def _check_lengths(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} != {b.n}")


def qwc(a: PauliString, b: PauliString) -> bool:
    """True iff ``a`` and ``b`` commute qubit-wise.

    On every qubit the letters must coincide or at least one must be the
    identity.
    """
    _check_lengths(a, b)
    both = a.support_mask & b.support_mask
    return ((a.x ^ b.x) | (a.z ^ b.z)) & both == 0


def qwc_product(a: PauliString, b: PauliString) -> PauliString:
    """Letterwise product of two qubit-wise commuting strings (no phase)."""
    if not qwc(a, b):
        raise ValueError(f"{a} and {b} do not commute qubit-wise")
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z)


def eval_outcome(p: PauliString, bits: Sequence[int]) -> int:
    """Product of the +/-1 outcomes over the support of ``p``."""
    if len(bits) != p.n:
        raise ValueError(f"expected {p.n} outcome bits, got {len(bits)}")
    value = 1
    for j in p.support:
        b = bits[j]
        if b not in (1, -1):
            raise ValueError(f"outcome bits must be +1 or -1, got {b!r}")
        value *= b
    return value


def eval_outcome_index(p: PauliString, outcome: int | np.ndarray) -> int | np.ndarray:
    """Same as :func:`eval_outcome` for outcomes given as basis indices.

    Bit ``1`` at qubit ``j`` stands for the -1 eigenvalue. Works elementwise
    on integer arrays.
    """
    if isinstance(outcome, np.ndarray):
        parity = np.bitwise_count(outcome & p.support_mask) & 1
        return 1 - 2 * parity.astype(np.int64)
    return -1 if (outcome & p.support_mask).bit_count() & 1 else 1


def index_to_bits(outcome: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if (outcome >> (n - 1 - j)) & 1 else 1 for j in range(n))


def bits_to_index(bits: Sequence[int]) -> int:
    n = len(bits)
    index = 0
    for j, b in enumerate(bits):
        if b == -1:
            index |= 1 << (n - 1 - j)
    return index


@dataclass(frozen=True)
class Hamiltonian:
    """Real-weighted sum of non-identity Pauli strings plus a constant offset."""

    n: int
    terms: tuple[tuple[float, PauliString], ...]
    offset: float = 0.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one non-identity term")
        seen = set()
        for coeff, p in self.terms:
            if p.n != self.n:
                raise ValueError(f"term {p} has {p.n} qubits, expected {self.n}")
            if p.is_identity():
                raise ValueError("identity terms belong in the offset")
            if not math.isfinite(coeff) or coeff == 0.0:
                raise ValueError(f"invalid coefficient {coeff!r} for {p}")
            if p in seen:
                raise ValueError(f"duplicate term {p}")
            seen.add(p)
        if not math.isfinite(self.offset):
            raise ValueError("offset must be finite")

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[float, str | PauliString]], offset: float = 0.0
    ) -> Hamiltonian:
        """Build a canonical Hamiltonian: merge duplicates, move identities to the offset."""
        merged: dict[PauliString, float] = {}
        scale: dict[PauliString, float] = {}
        n = None
        for coeff, p in terms:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            if n is None:
                n = p.n
            elif p.n != n:
                raise ValueError(f"inconsistent string lengths: {p.n} != {n}")
            coeff = float(coeff)
            if p.is_identity():
                offset += coeff
            else:
                merged[p] = merged.get(p, 0.0) + coeff
                scale[p] = scale.get(p, 0.0) + abs(coeff)
        # drop exact zeros and cancellations that leave only rounding noise
        kept = tuple(
            (c, p) for p, c in merged.items() if abs(c) > COEFF_RTOL * scale[p]
        )
        if n is None or not kept:
            raise ValueError("empty term list")
        return cls(n, kept, float(offset))

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def strings(self) -> tuple[PauliString, ...]:
        return tuple(p for _, p in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def one_norm(h: Hamiltonian) -> float:
    """Sum of absolute coefficients, excluding the identity offset."""
    return float(sum(abs(c) for c, _ in h.terms))


_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_hamiltonian(text: str | TextIO) -> Hamiltonian:
    """Parse ``<coefficient> <letters>`` lines into a :class:`Hamiltonian`.

    ``#`` starts a comment, blank lines are ignored. Identity strings are
    accumulated into ``offset``; repeated strings are summed.
    """
    if not isinstance(text, str):
        text = text.read()
    raw: list[tuple[float, PauliString]] = []
    n = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianParseError(
                f"expected '<coefficient> <pauli letters>', got {line!r}", lineno
            )
        coeff_s, label = parts
        if not _NUMBER.match(coeff_s):
            raise HamiltonianParseError(f"bad coefficient {coeff_s!r}", lineno)
        coeff = float(coeff_s)
        try:
            p = PauliString.from_label(label)
        except ValueError as exc:
            raise HamiltonianParseError(str(exc), lineno) from None
        if n is None:
            n = p.n
        elif p.n != n:
            raise HamiltonianParseError(
                f"inconsistent string lengths: {label!r} has {p.n} letters, expected {n}",
                lineno,
            )
        raw.append((coeff, p))
    try:
        return Hamiltonian.from_terms(raw)
    except ValueError as exc:
        raise HamiltonianParseError(str(exc)) from None


def serialize_hamiltonian(h: Hamiltonian) -> str:
    lines = []
    if h.offset != 0.0:
        lines.append(f"{h.offset!r} {'I' * h.n}")
    lines.extend(f"{c!r} {p.letters}" for c, p in h.terms)
    return "\n".join(lines) + "\n"


def load_hamiltonian(path) -> Hamiltonian:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh)

"""Phase-tracked n-qubit Pauli operators in the binary (x|z) representation.

An operator is stored as two bit tuples plus an integer phase exponent ``q``.
Its dense realization is

    i**q * P(x_1, z_1) (x) P(x_2, z_2) (x) ... (x) P(x_n, z_n)

with P(0,0)=I, P(1,0)=X, P(0,1)=Z, P(1,1)=Y, so the phase is the literal
prefix of the printed Pauli string (``-iY`` has ``q=3``). Qubit 1 is the
leftmost tensor factor and index 0 of the bit tuples. Computational basis
label 0 is the +1 eigenstate of Z.

All arithmetic is exact; no floating point is involved until
:func:`dense_matrix`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import PauliParseError, ResourceLimitError, SizeMismatchError

#: Largest qubit count for which dense matrices are built.
MAX_DENSE_QUBITS = 12

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}
_PREFIX = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PREFIX_TEXT = {0: "", 1: "i", 2: "-", 3: "-i"}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # Exponent of i in P(x1,z1) P(x2,z2) = i**g P(x1^x2, z1^z2).
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliOperator:
    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        x = tuple(int(b) for b in self.x_bits)
        z = tuple(int(b) for b in self.z_bits)
        if len(x) != len(z) or not x:
            raise SizeMismatchError("x_bits and z_bits must have the same positive length")
        if any(b not in (0, 1) for b in x + z):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls((0,) * n, (0,) * n)

    @classmethod
    def single(cls, n: int, letter: str, qubit: int) -> PauliOperator:
        """Single-qubit Pauli ``letter`` on 1-based ``qubit`` of an n-qubit register."""
        if not 1 <= qubit <= n:
            raise ValueError(f"qubit {qubit} outside 1..{n}")
        text = ["I"] * n
        text[qubit - 1] = letter
        return parse_pauli("".join(text), n)

    @classmethod
    def from_string(cls, text: str) -> PauliOperator:
        """Parse ``text`` inferring the qubit count from its length."""
        prefix = re.match(r"[+-]?i?", text).group(0)
        return parse_pauli(text, len(text) - len(prefix))

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def weight(self) -> int:
        return sum(1 for x, z in zip(self.x_bits, self.z_bits) if x or z)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliOperator({format_pauli(self)!r})"


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact product ``p @ q`` with the phase carried in the exponent of i."""
    if p.n != q.n:
        raise SizeMismatchError(f"cannot multiply {p.n}-qubit and {q.n}-qubit operators")
    phase = p.phase + q.phase
    for x1, z1, x2, z2 in zip(p.x_bits, p.z_bits, q.x_bits, q.z_bits):
        phase += _g(x1, z1, x2, z2)
    x = tuple(a ^ b for a, b in zip(p.x_bits, q.x_bits))
    z = tuple(a ^ b for a, b in zip(p.z_bits, q.z_bits))
    return PauliOperator(x, z, phase % 4)


def symplectic_product(p: PauliOperator, q: PauliOperator) -> int:
    """Binary symplectic form: 0 if the operators commute, 1 if they anticommute."""
    if p.n != q.n:
        raise SizeMismatchError(f"cannot compare {p.n}-qubit and {q.n}-qubit operators")
    total = 0
    for x1, z1, x2, z2 in zip(p.x_bits, p.z_bits, q.x_bits, q.z_bits):
        total += x1 * z2 + z1 * x2
    return total % 2


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    return symplectic_product(p, q) == 0


def dense_matrix(p: PauliOperator, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """2**n x 2**n complex matrix of ``p`` (qubit 1 is the most significant index bit)."""
    if p.n > max_qubits:
        raise ResourceLimitError(f"{p.n} qubits exceeds the dense cap of {max_qubits}")
    factors = [_SINGLE[_LETTERS[(x, z)]] for x, z in zip(p.x_bits, p.z_bits)]
    return (1j**p.phase) * reduce(np.kron, factors)


def parse_pauli(text: str, n: int) -> PauliOperator:
    """Parse ``[+|-][i]`` followed by exactly ``n`` letters from ``IXYZ``.

    >>> parse_pauli("-iY", 1).phase
    3
    """
    m = re.match(r"[+-]?i?", text)
    prefix = m.group(0)
    body = text[len(prefix):]
    x, z = [], []
    for offset, ch in enumerate(body):
        if ch not in _BITS:
            raise PauliParseError(f"unexpected character {ch!r}", len(prefix) + offset)
        bx, bz = _BITS[ch]
        x.append(bx)
        z.append(bz)
    if len(body) != n:
        raise PauliParseError(f"expected {n} Pauli letters, found {len(body)}",
                              len(prefix) + min(len(body), n))
    return PauliOperator(tuple(x), tuple(z), _PREFIX[prefix])


def format_pauli(p: PauliOperator) -> str:
    letters = "".join(_LETTERS[(x, z)] for x, z in zip(p.x_bits, p.z_bits))
    return _PREFIX_TEXT[p.phase] + letters

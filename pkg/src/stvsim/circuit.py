"""Circuit representation, the text file format, and exact gate arithmetic.

Qubit indexing convention
-------------------------
Qubit ``q`` of an ``n``-qubit circuit corresponds to bit position ``n - 1 - q``
of the amplitude index, so qubit 0 is the most significant bit. Every module
in the package shares this convention. Bitmasks (``QubitMask``) are always
indexed by bit position, never by qubit number.

Gate arithmetic is exact: one-qubit and two-qubit non-diagonal gates are
stored as Gaussian-integer matrices with a carried ``(1/sqrt 2)**e * i**s``
prefactor, and diagonal gates as powers of ``omega = exp(i*pi/4)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "GateKind",
    "Gate",
    "Circuit",
    "OctantPhase",
    "OctantDiagonal",
    "ScaledGaussianMatrix",
    "CircuitFormatError",
    "gate_matrix",
    "parse_circuit",
    "read_circuit",
    "serialize_circuit",
    "validate_circuit",
    "qubit_bit",
    "circuit_from_gates",
]


class GateKind(enum.Enum):
    H = "h"
    T = "t"
    Z = "z"
    P = "p"
    NOT = "x"
    XHalf = "x_1_2"
    YHalf = "y_1_2"
    CZ = "cz"
    CNOT = "cnot"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CZ, GateKind.CNOT) else 1

    @property
    def is_diagonal(self) -> bool:
        return self in _DIAGONAL

    @classmethod
    def from_name(cls, name: str) -> "GateKind":
        return cls(name.lower())


_DIAGONAL = frozenset({GateKind.T, GateKind.Z, GateKind.P, GateKind.CZ})


def qubit_bit(num_qubits: int, qubit: int) -> int:
    """Amplitude bit position of ``qubit``."""
    return num_qubits - 1 - qubit


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit. CZ is symmetric, so its qubits are kept sorted."""

    kind: GateKind
    qubits: tuple[int, ...]
    cycle: int = 0

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != self.kind.arity:
            raise ValueError(
                f"{self.kind.value} takes {self.kind.arity} qubit(s), got {len(qubits)}"
            )
        if self.kind is GateKind.CZ:
            qubits = tuple(sorted(qubits))
        object.__setattr__(self, "qubits", qubits)

    def __str__(self):
        return f"{self.cycle} {self.kind.value} " + " ".join(map(str, self.qubits))


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self):
        return len(self.gates)

    def lowered(self) -> "Circuit":
        """Rewrite CNOT as H.CZ.H on the target, P as T^2 and Z as T^4."""
        out = []
        for g in self.gates:
            if g.kind is GateKind.CNOT:
                control, target = g.qubits
                out.append(Gate(GateKind.H, (target,), g.cycle))
                out.append(Gate(GateKind.CZ, (control, target), g.cycle))
                out.append(Gate(GateKind.H, (target,), g.cycle))
            elif g.kind is GateKind.P:
                out.extend([Gate(GateKind.T, g.qubits, g.cycle)] * 2)
            elif g.kind is GateKind.Z:
                out.extend([Gate(GateKind.T, g.qubits, g.cycle)] * 4)
            else:
                out.append(g)
        return Circuit(self.num_qubits, out)

    def counts(self) -> dict[str, int]:
        """Total, two-qubit and T gate counts."""
        return {
            "all": len(self.gates),
            "2q": sum(g.kind.arity == 2 for g in self.gates),
            "t": sum(g.kind is GateKind.T for g in self.gates),
        }


# exact gate arithmetic

_OMEGA = np.exp(1j * np.pi / 4)


@dataclass(frozen=True)
class OctantPhase:
    """The phase ``omega**k`` with ``omega = exp(i*pi/4)``."""

    k: int

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % 8)

    def __mul__(self, other: "OctantPhase") -> "OctantPhase":
        return OctantPhase(self.k + other.k)

    def __complex__(self):
        return complex(_OMEGA**self.k)


@dataclass(frozen=True)
class OctantDiagonal:
    """Diagonal matrix whose entries are ``omega**octants[j]``."""

    octants: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "octants", tuple(int(k) % 8 for k in self.octants))

    @property
    def dim(self) -> int:
        return len(self.octants)

    @property
    def is_identity(self) -> bool:
        return not any(self.octants)

    def to_numpy(self) -> np.ndarray:
        return np.diag(_OMEGA ** np.array(self.octants, dtype=float))

    def __matmul__(self, other: "OctantDiagonal") -> "OctantDiagonal":
        return OctantDiagonal(tuple(a + b for a, b in zip(self.octants, other.octants)))

    def kron(self, other: "OctantDiagonal") -> "OctantDiagonal":
        return OctantDiagonal(tuple(a + b for a in self.octants for b in other.octants))


def _gint(z: complex) -> complex:
    return complex(int(round(z.real)), int(round(z.imag)))


@dataclass(frozen=True)
class ScaledGaussianMatrix:
    """``(1/sqrt 2)**rt2_exp * i**i_exp * entries`` with Gaussian-integer entries.

    Entries are stored as Python complex numbers with integral parts. Products
    are kept in canonical form: common factors of two move into ``rt2_exp``
    and a common factor of ``i`` moves into ``i_exp``.
    """

    entries: tuple[tuple[complex, ...], ...]
    rt2_exp: int
    i_exp: int = 0

    def __post_init__(self):
        ent = tuple(tuple(_gint(complex(z)) for z in row) for row in self.entries)
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "i_exp", int(self.i_exp) % 4)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def to_numpy(self) -> np.ndarray:
        return (
            np.array(self.entries, dtype=complex)
            * 2.0 ** (-self.rt2_exp / 2)
            * (1j**self.i_exp)
        )

    @property
    def is_representable(self) -> bool:
        """All real and imaginary parts lie in {-1, 0, 1}."""
        return all(
            abs(z.real) <= 1 and abs(z.imag) <= 1 for row in self.entries for z in row
        )

    @property
    def is_diagonal(self) -> bool:
        return all(
            z == 0 for r, row in enumerate(self.entries) for c, z in enumerate(row) if r != c
        )

    @property
    def is_identity(self) -> bool:
        return self.is_diagonal and np.allclose(self.to_numpy(), np.eye(self.dim))

    def canonical(self) -> "ScaledGaussianMatrix":
        ent = [list(row) for row in self.entries]
        e, s = self.rt2_exp, self.i_exp
        flat = [z for row in ent for z in row]
        if not any(flat):
            return self
        while all(z.real % 2 == 0 and z.imag % 2 == 0 for z in flat):
            ent = [[z / 2 for z in row] for row in ent]
            flat = [z for row in ent for z in row]
            e -= 2
        if all(z.real == 0 for z in flat):
            ent = [[z * -1j for z in row] for row in ent]
            s += 1
        return ScaledGaussianMatrix(tuple(map(tuple, ent)), e, s)

    def __matmul__(self, other: "ScaledGaussianMatrix") -> "ScaledGaussianMatrix":
        a = np.array(self.entries, dtype=complex)
        b = np.array(other.entries, dtype=complex)
        prod = a @ b
        return ScaledGaussianMatrix(
            tuple(map(tuple, prod)),
            self.rt2_exp + other.rt2_exp,
            self.i_exp + other.i_exp,
        ).canonical()

    def kron(self, other: "ScaledGaussianMatrix") -> "ScaledGaussianMatrix":
        """``self`` acts on the more significant index bit of the result."""
        prod = np.kron(
            np.array(self.entries, dtype=complex), np.array(other.entries, dtype=complex)
        )
        return ScaledGaussianMatrix(
            tuple(map(tuple, prod)),
            self.rt2_exp + other.rt2_exp,
            self.i_exp + other.i_exp,
        )

    def reduced(self) -> tuple[int, "ScaledGaussianMatrix"]:
        """Split off a common ``(1+i)`` factor: returns ``(m, R)`` with entries = (1+i)**m * R.

        A Gaussian integer ``a+bi`` is divisible by ``1+i`` iff ``a+b`` is even.
        ``R`` keeps this matrix's scale fields; callers account for ``m``.
        """
        ent = self.entries
        m = 0
        while any(z for row in ent for z in row) and all(
            (int(z.real) + int(z.imag)) % 2 == 0 for row in ent for z in row
        ):
            ent = tuple(
                tuple(complex((z.real + z.imag) / 2, (z.imag - z.real) / 2) for z in row)
                for row in ent
            )
            m += 1
        return m, ScaledGaussianMatrix(ent, self.rt2_exp, self.i_exp)

    def to_octant_diagonal(self) -> OctantDiagonal | None:
        """The equivalent octant diagonal, or None if not diagonal in omega powers."""
        if not self.is_diagonal:
            return None
        octs = []
        for d in np.diag(self.to_numpy()):
            k = math.atan2(d.imag, d.real) / (math.pi / 4)
            if abs(abs(d) - 1) > 1e-12 or abs(k - round(k)) > 1e-9:
                return None
            octs.append(int(round(k)))
        return OctantDiagonal(tuple(octs))


def _sgm(rows, e, s=0):
    return ScaledGaussianMatrix(tuple(tuple(r) for r in rows), e, s)


_MATRICES = {
    GateKind.H: _sgm([[1, 1], [1, -1]], 1),
    GateKind.NOT: _sgm([[0, 1], [1, 0]], 0),
    GateKind.XHalf: _sgm([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], 2),
    GateKind.YHalf: _sgm([[1 + 1j, 1 + 1j], [-1 - 1j, 1 + 1j]], 2),
    GateKind.CNOT: _sgm(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], 0
    ),
    GateKind.T: OctantDiagonal((0, 1)),
    GateKind.P: OctantDiagonal((0, 2)),
    GateKind.Z: OctantDiagonal((0, 4)),
    GateKind.CZ: OctantDiagonal((0, 0, 0, 4)),
}


def gate_matrix(kind: GateKind) -> ScaledGaussianMatrix | OctantDiagonal:
    """Exact matrix of ``kind``; octant diagonal for T, P, Z and CZ."""
    return _MATRICES[kind]


# text format


class CircuitFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"{message}, line {line}")


def parse_circuit(text: str) -> Circuit:
    """Parse the ``<cycle> <gate> <q0> [<q1>]`` format.

    The first non-comment line holds the qubit count. Gates are sorted stably
    by cycle. ``#`` starts a comment.
    """
    n = None
    entries = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1:
                raise CircuitFormatError("expected qubit count", lineno)
            try:
                n = int(fields[0])
            except ValueError:
                raise CircuitFormatError("expected qubit count", lineno) from None
            if n < 1:
                raise CircuitFormatError("qubit count must be positive", lineno)
            continue
        if len(fields) < 3:
            raise CircuitFormatError("malformed line", lineno)
        try:
            kind = GateKind.from_name(fields[1])
        except ValueError:
            raise CircuitFormatError(f"unknown gate {fields[1]!r}", lineno) from None
        try:
            cycle = int(fields[0])
            qubits = tuple(int(f) for f in fields[2:])
        except ValueError:
            raise CircuitFormatError("malformed line", lineno) from None
        if cycle < 0:
            raise CircuitFormatError("negative cycle", lineno)
        if len(qubits) != kind.arity:
            raise CircuitFormatError(
                f"{kind.value} takes {kind.arity} qubit(s)", lineno
            )
        if len(set(qubits)) != len(qubits):
            raise CircuitFormatError("duplicate qubit in gate", lineno)
        for q in qubits:
            if not 0 <= q < n:
                raise CircuitFormatError(f"qubit {q} out of range", lineno)
            if (cycle, q) in seen:
                raise CircuitFormatError(
                    f"qubit {q} used twice in cycle {cycle}", lineno
                )
            seen[cycle, q] = lineno
        entries.append(Gate(kind, qubits, cycle))
    if n is None:
        raise CircuitFormatError("empty circuit file")
    entries.sort(key=lambda g: g.cycle)
    return Circuit(n, entries)


def read_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def serialize_circuit(c: Circuit) -> str:
    return "\n".join([str(c.num_qubits)] + [str(g) for g in c.gates]) + "\n"


def validate_circuit(c: Circuit) -> list[str]:
    """All invariant violations of ``c``; an empty list means valid."""
    errors = []
    if c.num_qubits < 1:
        errors.append("qubit count must be positive")
    last_cycle = {}
    for i, g in enumerate(c.gates):
        if len(set(g.qubits)) != len(g.qubits):
            errors.append(f"gate {i}: duplicate qubit in gate")
        for q in g.qubits:
            if not 0 <= q < c.num_qubits:
                errors.append(f"gate {i}: qubit {q} out of range")
            elif q in last_cycle and last_cycle[q] > g.cycle:
                errors.append(
                    f"gate {i}: cycle {g.cycle} on qubit {q} after cycle {last_cycle[q]}"
                )
        for q in g.qubits:
            last_cycle[q] = max(last_cycle.get(q, g.cycle), g.cycle)
    return errors


def circuit_from_gates(num_qubits: int, gates: Iterable[tuple]) -> Circuit:
    """Build a circuit from ``(name, q0[, q1])`` tuples, one cycle per gate."""
    out = []
    for cycle, entry in enumerate(gates):
        name, *qubits = entry
        out.append(Gate(GateKind.from_name(name), tuple(qubits), cycle))
    return Circuit(num_qubits, out)


"""Brute-force reference simulator in complex128.

Gates are applied one at a time, in input order, as full numeric matrices.
Nothing here is shared with the engine: the matrices are written out again
from their definitions, CNOT/P/Z are applied directly rather than lowered,
and there is no scale bookkeeping.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, GateKind

__all__ = [
    "ORACLE_MAX_QUBITS",
    "KRON_MAX_QUBITS",
    "oracle_matrix",
    "oracle_run",
    "kron_run",
    "compare_states",
    "dump_dense",
]

ORACLE_MAX_QUBITS = 24
KRON_MAX_QUBITS = 6

_W = np.exp(1j * np.pi / 4)
_MATRICES = {
    GateKind.H: np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    GateKind.T: np.diag([1, _W]),
    GateKind.P: np.diag([1, 1j]),
    GateKind.Z: np.diag([1, -1]),
    GateKind.NOT: np.array([[0, 1], [1, 0]]),
    GateKind.XHalf: np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2,
    GateKind.YHalf: np.array([[1 + 1j, 1 + 1j], [-1 - 1j, 1 + 1j]]) / 2,
    GateKind.CZ: np.diag([1, 1, 1, -1]),
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
}


def oracle_matrix(kind: GateKind) -> np.ndarray:
    """complex128 matrix; for two-qubit gates the first qubit is the more significant factor."""
    return _MATRICES[kind].astype(np.complex128)


def _apply(psi: np.ndarray, n: int, qubits, m: np.ndarray) -> np.ndarray:
    # axis q of the (2,)*n tensor is qubit q, since qubit 0 is the top bit
    k = len(qubits)
    t = psi.reshape((2,) * n)
    t = np.tensordot(m.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(qubits)))
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return t.reshape(-1)


def _initial(n: int, initial) -> np.ndarray:
    if initial is None:
        psi = np.zeros(1 << n, dtype=np.complex128)
        psi[0] = 1
        return psi
    psi = np.array(initial, dtype=np.complex128).reshape(-1)
    if psi.size != 1 << n:
        raise ValueError(f"initial state must have {1 << n} amplitudes")
    return psi


def oracle_run(c: Circuit, initial=None) -> np.ndarray:
    """Final state of ``c`` from |0...0> (or ``initial``) as complex128."""
    n = c.num_qubits
    if n > ORACLE_MAX_QUBITS:
        raise ValueError(f"oracle is limited to {ORACLE_MAX_QUBITS} qubits, got {n}")
    psi = _initial(n, initial)
    for g in c.gates:
        psi = _apply(psi, n, g.qubits, oracle_matrix(g.kind))
    return psi


def _full_operator(n: int, qubits, m: np.ndarray) -> np.ndarray:
    """The 2**n x 2**n operator of one gate, built entry by entry from basis states."""
    dim = 1 << n
    k = len(qubits)
    out = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub_in = 0
        for q in qubits:
            sub_in = 2 * sub_in + bits[q]
        for sub_out in range(1 << k):
            amp = m[sub_out, sub_in]
            if amp == 0:
                continue
            row_bits = list(bits)
            for pos, q in enumerate(qubits):
                row_bits[q] = (sub_out >> (k - 1 - pos)) & 1
            row = 0
            for b in row_bits:
                row = 2 * row + b
            out[row, col] += amp
    return out


def kron_run(c: Circuit, initial=None) -> np.ndarray:
    """Second reference for tiny circuits: multiply full 2**n operators, then apply once."""
    n = c.num_qubits
    if n > KRON_MAX_QUBITS:
        raise ValueError(f"kron reference is limited to {KRON_MAX_QUBITS} qubits")
    u = np.eye(1 << n, dtype=np.complex128)
    for g in c.gates:
        if g.kind.arity == 1:
            (q,) = g.qubits
            op = np.kron(np.kron(np.eye(1 << q), oracle_matrix(g.kind)), np.eye(1 << (n - 1 - q)))
        else:
            op = _full_operator(n, g.qubits, oracle_matrix(g.kind))
        u = op @ u
    return u @ _initial(n, initial)


def _dense(x) -> np.ndarray:
    if hasattr(x, "amplitudes"):
        return x.amplitudes()
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def compare_states(a, b, tol: float = 1e-5) -> tuple[float, int, bool]:
    """``(max |a_j - b_j|, worst j, passed)``; engine states are read with their scale."""
    a, b = _dense(a), _dense(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    d = np.abs(a - b)
    j = int(np.argmax(d))
    worst = float(d[j])
    return worst, j, worst <= tol


def dump_dense(psi: np.ndarray, indices="all") -> str:
    """Same ``<bitstring> <re> <im>`` format as the engine dump."""
    n = int(psi.size).bit_length() - 1
    if isinstance(indices, str):
        indices = range(psi.size)
    lines = []
    for j in indices:
        a = complex(psi[int(j)])
        lines.append(f"{int(j):0{n}b} {a.real:.9g} {a.imag:.9g}")
    return "\n".join(lines) + ("\n" if lines else "")

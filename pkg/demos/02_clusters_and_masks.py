"""
Clusters, bitmasks and the diagonal pass
========================================

A four-qubit circuit with H, CZ, T, X½ and Y½ layers is reordered into
clusters of one gate kind. Each cluster becomes a bitmask, and all diagonal
gates (CZ and T) are applied in a single sweep over the state.
"""

from stvsim.circuit import Circuit, Gate, GateKind, qubit_bit
from stvsim.kernels.diagonal import cz_sign, gray_code, t_phase_octant
from stvsim.planner import build_plan, cluster_by_reordering, dump_plan, encode_cz_masks

H, T, X, Y, CZ = GateKind.H, GateKind.T, GateKind.XHalf, GateKind.YHalf, GateKind.CZ
gates = [Gate(H, (q,), 0) for q in range(4)]
gates += [Gate(CZ, (0, 1), 1), Gate(T, (2,), 1), Gate(T, (0,), 2), Gate(CZ, (2, 3), 2)]
gates += [Gate(X, (0,), 3), Gate(T, (1,), 3), Gate(X, (2,), 3), Gate(T, (3,), 3)]
gates += [Gate(X, (1,), 4), Gate(Y, (2,), 4), Gate(Y, (1,), 5), Gate(Y, (3,), 5)]
gates += [Gate(H, (q,), 6) for q in range(4)]
c = Circuit(4, gates)

# Gates move forward past anything they commute with and join the first
# cluster of their kind. CZ and T are both diagonal, so they pass each other.
for cl in cluster_by_reordering(c):
    if cl[0].kind is CZ:
        print(f"{'cz':>6}: pairs {[g.qubits for g in cl]}")
        continue
    mask = sum(1 << qubit_bit(4, g.qubits[0]) for g in cl)
    print(f"{cl[0].kind.value:>6}: mask {mask:04b}")

# CZ masks, one per bit: mask k lists the partners of bit k.
# Six CZ gates on every pair of four qubits give 1110 1101 1011 0111.
full = encode_cz_masks([Gate(CZ, (a, b)) for a in range(4) for b in range(a + 1, 4)], 4)
print("all-pairs CZ masks:", [f"{m:04b}" for m in full.masks])

# The sign of amplitude j is the parity of active CZ gates, and the T phase
# is omega**popcount(mask & j). Walking j in Gray code order changes one bit
# per step, so each step needs one masked popcount.
print("gray order:", [gray_code(k) for k in range(8)])
for k in range(8):
    j = gray_code(k)
    print(f"  j={j:04b}  cz sign {cz_sign(full, j):+d}  T octant {t_phase_octant([0b1111], j)}")

# The plan: the first H layer becomes the initial superposition, the CZ and
# T clusters one diagonal pass with the low-qubit one-qubit work fused in,
# and the high qubits a cache-blocked transform.
print()
print(dump_plan(build_plan(c)), end="")

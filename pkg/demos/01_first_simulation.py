"""
First simulation
================

Build a small circuit, simulate it, and look at the result three ways:
raw amplitudes, a check against the brute-force reference, and samples.

Qubit 0 is the most significant bit of an amplitude index, so the outcome
string "100" means qubit 0 measured 1.
"""

import numpy as np

from stvsim import circuit_from_gates
from stvsim.exec import simulate
from stvsim.oracle import compare_states, oracle_run
from stvsim.state import dump, norm, sample_measurement

# A three-qubit GHZ state, then a T on the last qubit to give it a phase.
# CNOT is rewritten to H.CZ.H on the target before planning.
c = circuit_from_gates(3, [("h", 0), ("cnot", 0, 1), ("cnot", 1, 2), ("t", 2)])

sv = simulate(c)
print("stored amplitudes are complex64:", sv.amps.dtype)
print("carried scale (1/sqrt 2)**p * i**s:", sv.scale)
print(dump(sv, [0b000, 0b111]), end="")
print("norm", round(norm(sv), 7))

# The reference applies every gate as a complex128 matrix.
worst, j, ok = compare_states(sv, oracle_run(c))
print(f"max |engine - reference| = {worst:.2e} at {j:03b} -> {'ok' if ok else 'MISMATCH'}")

# Sampling is seeded: the same seed gives the same outcomes.
shots = sample_measurement(sv, seed=1, shots=1000)
values, counts = np.unique(shots, return_counts=True)
for v, k in zip(values, counts):
    print(v, k)

"""Schrodinger-style state-vector simulation with clustered, multiply-free kernels."""

from .circuit import (
    Circuit,
    CircuitFormatError,
    Gate,
    GateKind,
    OctantDiagonal,
    OctantPhase,
    ScaledGaussianMatrix,
    circuit_from_gates,
    gate_matrix,
    parse_circuit,
    read_circuit,
    serialize_circuit,
    validate_circuit,
)

__version__ = "0.1.0"

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stvsim.benchmarks import random_circuit
from stvsim.circuit import (
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
    qubit_bit,
    serialize_circuit,
    validate_circuit,
)
from stvsim.oracle import oracle_matrix

ONE_QUBIT_NON_DIAGONAL = [GateKind.H, GateKind.NOT, GateKind.XHalf, GateKind.YHalf]


@pytest.mark.parametrize("kind", list(GateKind))
def test_exact_matrix_matches_numeric_definition(kind):
    assert np.allclose(gate_matrix(kind).to_numpy(), oracle_matrix(kind), atol=1e-15)


def test_qubit_zero_is_most_significant_bit():
    assert qubit_bit(5, 0) == 4
    assert qubit_bit(5, 4) == 0


def test_parse_numbered_cycles_sorts_stably_by_cycle():
    text = "3\n# comment\n2 t 0\n0 h 0\n0 h 1\n1 cz 2 1\n2 x_1_2 1\n"
    c = parse_circuit(text)
    assert c.num_qubits == 3
    assert [(g.cycle, g.kind, g.qubits) for g in c.gates] == [
        (0, GateKind.H, (0,)),
        (0, GateKind.H, (1,)),
        (1, GateKind.CZ, (1, 2)),
        (2, GateKind.T, (0,)),
        (2, GateKind.XHalf, (1,)),
    ]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty"),
        ("x\n", "qubit count"),
        ("0\n", "positive"),
        ("2\n0 q 0\n", "unknown gate"),
        ("2\n0 h 2\n", "out of range"),
        ("2\n0 cz 0\n", "takes 2"),
        ("2\n0 cz 1 1\n", "duplicate"),
        ("2\n0 h 0\n0 t 0\n", "used twice"),
        ("2\n-1 h 0\n", "negative"),
        ("2\n0 h\n", "malformed"),
    ],
)
def test_parse_errors_name_the_problem(text, fragment):
    with pytest.raises(CircuitFormatError, match=fragment):
        parse_circuit(text)


def test_parse_error_reports_line():
    with pytest.raises(CircuitFormatError) as info:
        parse_circuit("2\n0 h 0\n1 h 5\n")
    assert info.value.line == 3


@given(st.integers(1, 8), st.integers(0, 40), st.integers(0, 10**6))
def test_serialize_round_trip(n, depth, seed):
    c = random_circuit(n, depth, seed)
    assert parse_circuit(serialize_circuit(c)) == c


def test_cz_qubits_are_sorted_and_gate_arity_checked():
    assert Gate(GateKind.CZ, (3, 1)).qubits == (1, 3)
    assert Gate(GateKind.CNOT, (3, 1)).qubits == (3, 1)
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0, 1))


def test_validate_reports_range_and_cycle_order():
    c = Circuit(2, (Gate(GateKind.H, (0,), 3), Gate(GateKind.T, (0,), 1), Gate(GateKind.H, (4,), 0)))
    errors = validate_circuit(c)
    assert any("after cycle 3" in e for e in errors)
    assert any("out of range" in e for e in errors)
    assert validate_circuit(circuit_from_gates(2, [("h", 0), ("cz", 0, 1)])) == []


def test_lowering_rewrites_cnot_p_z():
    c = circuit_from_gates(2, [("cnot", 0, 1), ("p", 1), ("z", 0)])
    kinds = [(g.kind, g.qubits) for g in c.lowered().gates]
    assert kinds == [
        (GateKind.H, (1,)), (GateKind.CZ, (0, 1)), (GateKind.H, (1,)),
        (GateKind.T, (1,)), (GateKind.T, (1,)),
        (GateKind.T, (0,)), (GateKind.T, (0,)), (GateKind.T, (0,)), (GateKind.T, (0,)),
    ]
    assert c.counts() == {"all": 3, "2q": 1, "t": 0}


def test_octant_arithmetic():
    assert (OctantPhase(5) * OctantPhase(7)).k == 4
    assert np.isclose(complex(OctantPhase(1)), (1 + 1j) / np.sqrt(2))
    t = gate_matrix(GateKind.T)
    assert (t @ t @ t @ t) == gate_matrix(GateKind.Z)
    assert OctantDiagonal((8, 16)).is_identity
    assert t.kron(t).octants == (0, 1, 1, 2)


@given(st.lists(st.sampled_from(ONE_QUBIT_NON_DIAGONAL), min_size=1, max_size=6))
def test_exact_products_match_numeric_products(kinds):
    exact = gate_matrix(kinds[0])
    numeric = oracle_matrix(kinds[0])
    for k in kinds[1:]:
        exact = gate_matrix(k) @ exact
        numeric = oracle_matrix(k) @ numeric
    assert np.allclose(exact.to_numpy(), numeric, atol=1e-12)


@given(st.sampled_from(ONE_QUBIT_NON_DIAGONAL), st.sampled_from(ONE_QUBIT_NON_DIAGONAL))
def test_reduced_form_has_unit_entries(a, b):
    m = gate_matrix(a).kron(gate_matrix(b))
    k, r = m.reduced()
    assert r.is_representable
    scaled = r.to_numpy() * (1 + 1j) ** k
    assert np.allclose(scaled, m.to_numpy())


def test_half_gates_square_to_full_gates():
    x = gate_matrix(GateKind.XHalf)
    y = gate_matrix(GateKind.YHalf)
    assert np.allclose((x @ x).to_numpy(), oracle_matrix(GateKind.NOT))
    assert np.allclose((y @ y).to_numpy(), [[0, 1j], [-1j, 0]])


def test_canonical_pulls_out_common_factors():
    m = ScaledGaussianMatrix(((2j, 0), (0, 2j)), 0).canonical()
    assert m.entries == ((1, 0), (0, 1))
    assert m.rt2_exp == -2 and m.i_exp == 1

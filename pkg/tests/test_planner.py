import numpy as np
import pytest
from hypothesis import given, strategies as st

from stvsim.benchmarks import bundled_circuit, random_circuit
from stvsim.circuit import Circuit, Gate, GateKind, circuit_from_gates, gate_matrix, qubit_bit
from stvsim.oracle import oracle_run
from stvsim.planner import (
    OPTIMIZATIONS,
    CZCluster,
    DiagonalPass,
    GenericPass,
    IdentityPass,
    OneQubitOp,
    PairedGateOp,
    PairedGatePass,
    RecursiveTransformPass,
    SuperpositionPass,
    build_plan,
    cluster_by_reordering,
    coalesce_adjacent,
    commutes,
    dump_plan,
    encode_cz_masks,
    encode_t_layers,
    is_identity_op,
    pair_one_qubit_gates,
)

from conftest import engine_amplitudes, figure_circuit


def op(kind, bit, n=8):
    return OneQubitOp(bit, gate_matrix(kind), (Gate(kind, (n - 1 - bit,)),))


def cluster_mask(cluster, n):
    return sum(1 << qubit_bit(n, g.qubits[0]) for g in cluster)


def test_reordering_groups_the_example_into_six_clusters():
    clusters = cluster_by_reordering(figure_circuit())
    summary = [(cl[0].kind, len(cl)) for cl in clusters]
    assert summary == [
        (GateKind.H, 4), (GateKind.CZ, 2), (GateKind.T, 4),
        (GateKind.XHalf, 3), (GateKind.YHalf, 3), (GateKind.H, 4),
    ]
    masks = [cluster_mask(cl, 4) for cl in clusters if cl[0].kind.arity == 1]
    assert masks == [0b1111, 0b1111, 0b1110, 0b0111, 0b1111]
    assert [tl.mask for tl in encode_t_layers(clusters[2], 4)] == [0b1111]


def test_reordering_never_moves_a_gate_past_a_non_commuting_one():
    c = circuit_from_gates(2, [("h", 0), ("t", 0), ("h", 1), ("h", 0)])
    clusters = cluster_by_reordering(c)
    # H(0) cannot join H(0) across T(0); H(1) joins the first cluster
    assert [[(g.kind.value, g.qubits) for g in cl] for cl in clusters] == [
        [("h", (0,)), ("h", (1,))], [("t", (0,))], [("h", (0,))],
    ]


def test_commutation_rule():
    h0, t0, t1 = Gate(GateKind.H, (0,)), Gate(GateKind.T, (0,)), Gate(GateKind.T, (1,))
    cz = Gate(GateKind.CZ, (0, 1))
    assert commutes(h0, t1)
    assert not commutes(h0, t0)
    assert commutes(t0, cz)
    assert not commutes(h0, cz)


@given(st.integers(2, 7), st.integers(0, 40), st.integers(0, 10**6))
def test_clusters_partition_the_circuit_into_single_kinds(n, depth, seed):
    c = random_circuit(n, depth, seed).lowered()
    clusters = cluster_by_reordering(c)
    flat = [g for cl in clusters for g in cl]
    assert sorted(map(id, flat)) == sorted(map(id, c.gates))
    for cl in clusters:
        assert len({g.kind for g in cl}) == 1
        if not cl[0].kind.is_diagonal:
            assert len({g.qubits for g in cl}) == len(cl)


def test_cz_masks_for_all_pairs_of_four_qubits():
    gates = [Gate(GateKind.CZ, (a, b)) for a in range(4) for b in range(a + 1, 4)]
    cz = encode_cz_masks(gates, 4)
    assert cz.masks == (0b1110, 0b1101, 0b1011, 0b0111)
    assert sum(bin(m).count("1") for m in cz.masks) == 12
    assert cz.gate_count == 6


def test_cz_masks_are_indexed_by_bit_position():
    cz = encode_cz_masks([Gate(GateKind.CZ, (0, 1))], 3)
    # qubits 0 and 1 are bits 2 and 1
    assert cz.masks == (0b000, 0b100, 0b010)
    with pytest.raises(ValueError):
        encode_cz_masks([Gate(GateKind.CZ, (0, 1)), Gate(GateKind.CZ, (1, 0))], 3)
    with pytest.raises(ValueError):
        encode_cz_masks([Gate(GateKind.T, (0,))], 3)


def test_t_layers_first_fit():
    gates = [Gate(GateKind.T, (q,)) for q in (0, 1, 0, 2, 0, 1)]
    assert [t.mask for t in encode_t_layers(gates, 3)] == [0b111, 0b110, 0b100]


def test_pairing_by_group_in_ascending_bit_order():
    layer = [op(GateKind.XHalf, 5), op(GateKind.YHalf, 1), op(GateKind.XHalf, 3),
             op(GateKind.H, 0), op(GateKind.H, 6), op(GateKind.NOT, 2)]
    pairs, singles = pair_one_qubit_gates(layer)
    assert [p.bits for p in pairs] == [(3, 1), (6, 0)]
    assert [p.bits for p in singles] == [(5, -1), (2, -1)]
    _, singles = pair_one_qubit_gates(layer, pairing=False)
    assert [p.bits for p in singles] == [(b, -1) for b in (0, 1, 2, 3, 5, 6)]


def test_paired_op_orders_high_bit_first_and_rejects_bad_shapes():
    p = PairedGateOp((op(GateKind.H, 1), op(GateKind.XHalf, 4)))
    assert p.bits == (4, 1)
    assert p.kinds == ("x_1_2", "h")
    with pytest.raises(ValueError):
        PairedGateOp((op(GateKind.H, 1), op(GateKind.H, 1)))


def test_coalescing_y_half_after_h_gives_a_diagonal_product():
    hh = PairedGateOp((op(GateKind.H, 1), op(GateKind.H, 0)))
    yy = PairedGateOp((op(GateKind.YHalf, 1), op(GateKind.YHalf, 0)))
    merged = coalesce_adjacent(hh, yy)
    assert merged is not None and merged.matrix.is_diagonal
    assert np.allclose(merged.matrix.to_numpy(), yy.matrix.to_numpy() @ hh.matrix.to_numpy())
    # the other order is not diagonal
    assert not coalesce_adjacent(yy, hh).matrix.is_diagonal


def test_coalescing_needs_matching_bits_and_unit_entries():
    assert coalesce_adjacent(PairedGateOp((op(GateKind.H, 1),)), PairedGateOp((op(GateKind.H, 2),))) is None
    # H then X½ has entries of magnitude 2 and 0 before scaling: (1+i, 1-i) rows stay unit, so it merges
    hx = coalesce_adjacent(PairedGateOp((op(GateKind.H, 1),)), PairedGateOp((op(GateKind.XHalf, 1),)))
    assert hx is not None and hx.matrix.is_representable
    hh = coalesce_adjacent(PairedGateOp((op(GateKind.H, 1),)), PairedGateOp((op(GateKind.H, 1),)))
    assert is_identity_op(hh)


def test_plan_for_the_example():
    plan = build_plan(figure_circuit())
    kinds = [type(p) for p in plan.passes]
    assert kinds[0] is SuperpositionPass and plan.starts_in_superposition
    diag = plan.passes[1]
    assert isinstance(diag, DiagonalPass)
    assert diag.cz.gate_count == 2 and [t.mask for t in diag.t_layers] == [0b1111]
    assert diag.fused_low_1q and all(b < plan.low_high_boundary for o in diag.fused_low_1q for b in o.bits if b >= 0)
    assert all(isinstance(p, RecursiveTransformPass) for p in plan.passes[2:])
    assert np.max(np.abs(engine_amplitudes(figure_circuit()) - oracle_run(figure_circuit()))) < 1e-6


def conserved(plan, c):
    key = lambda g: (g.cycle, g.kind.value, g.qubits)
    return sorted(map(key, plan.gates)) == sorted(map(key, c.lowered().gates))


@given(st.integers(1, 8), st.integers(0, 40), st.integers(0, 10**6),
       st.sets(st.sampled_from(OPTIMIZATIONS)), st.booleans())
def test_plans_consume_every_lowered_gate_exactly_once(n, depth, seed, off, leading_h):
    c = random_circuit(n, depth, seed, leading_h=leading_h)
    assert conserved(build_plan(c, disabled=off), c)


@pytest.mark.parametrize("name", ["grid_4x4_d26", "grid_4x5_d26"])
def test_bundled_plans_conserve_gates(name):
    c = bundled_circuit(name)
    plan = build_plan(c)
    assert conserved(plan, c)
    assert sum(len(p.gates) for p in plan.passes) == c.lowered().counts()["all"]


def test_high_ops_sorted_and_low_ops_below_boundary():
    c = bundled_circuit("grid_4x4_d26")
    plan = build_plan(c, boundary=6)
    for p in plan.passes:
        if isinstance(p, RecursiveTransformPass):
            hbs = [o.bits[0] for o in p.ops]
            assert hbs == sorted(hbs, reverse=True) and min(hbs) >= 6
        if isinstance(p, DiagonalPass):
            assert all(b < 6 for o in p.fused_low_1q for b in o.bits)


def test_all_kernel_optimizations_off_gives_one_generic_pass_per_gate():
    c = random_circuit(4, 20, seed=3)
    plan = build_plan(c, disabled=OPTIMIZATIONS)
    assert all(isinstance(p, GenericPass) for p in plan.passes)
    assert len(plan.passes) == len(c.lowered().gates)


def test_no_diag_fusion_gives_one_diagonal_pass_per_gate():
    c = bundled_circuit("grid_4x4_d26")
    plan = build_plan(c, disabled={"diag_fusion"})
    diag = [p for p in plan.passes if isinstance(p, DiagonalPass)]
    assert all(len(p.gates) == 1 and not p.fused_low_1q for p in diag)


def test_duplicate_cz_pairs_split_into_later_passes():
    c = circuit_from_gates(3, [("cz", 0, 1), ("t", 2), ("cz", 0, 1), ("cz", 1, 2)])
    plan = build_plan(c)
    diag = [p for p in plan.passes if isinstance(p, DiagonalPass)]
    assert [p.cz.gate_count for p in diag] == [2, 1]
    assert np.allclose(engine_amplitudes(c), oracle_run(c), atol=1e-6)


def test_cancelled_products_are_kept_as_identity_pass():
    c = circuit_from_gates(2, [("h", 0), ("h", 0)])
    plan = build_plan(c)
    assert [type(p) for p in plan.passes] == [IdentityPass]
    assert len(plan.gates) == 2


def test_trailing_h_layer_is_labelled():
    gates = [("h", q) for q in range(4)] + [("cz", 0, 1), ("t", 3)] + [("h", q) for q in range(4)]
    plan = build_plan(circuit_from_gates(4, gates), disabled={"recursive_transform"})
    assert [p.category for p in plan.passes] == ["initial H", "diagonal + low 1q", "final H"]
    assert isinstance(plan.passes[-1], PairedGatePass)


def test_argument_checks():
    c = random_circuit(3, 5)
    with pytest.raises(ValueError):
        build_plan(c, boundary=4)
    with pytest.raises(ValueError):
        build_plan(c, disabled={"turbo"})


def test_dump_plan_prints_masks_msb_first():
    text = dump_plan(build_plan(figure_circuit()))
    assert text.splitlines()[0] == "plan n=4 boundary=2 passes=3"
    assert "    cz bit 3: 0100" in text
    assert "    t layer: 1111" in text
    assert CZCluster((0, 0)).is_empty

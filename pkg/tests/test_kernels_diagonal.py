import numpy as np
import pytest
from hypothesis import given, strategies as st

from stvsim.circuit import Circuit, Gate, GateKind
from stvsim.kernels.diagonal import (
    MIN_BLOCK_BITS,
    apply_diagonal_pass,
    cz_sign,
    cz_signs_for_block,
    gray_code,
    prepare_diagonal,
    t_phase_octant,
)
from stvsim.oracle import oracle_run
from stvsim.planner import DiagonalPass, encode_cz_masks, encode_t_layers
from stvsim.state import from_array

from conftest import random_state


def random_diagonal_gates(n, rng, max_cz=None, max_t=12):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    k = rng.integers(0, len(pairs) + 1) if max_cz is None else min(max_cz, len(pairs))
    chosen = [pairs[i] for i in rng.permutation(len(pairs))[:k]]
    cz = [Gate(GateKind.CZ, p) for p in chosen]
    t = [Gate(GateKind.T, (int(q),)) for q in rng.integers(0, n, size=rng.integers(0, max_t + 1))]
    return cz, t


def diagonal_pass(cz, t, n):
    return DiagonalPass(encode_cz_masks(cz, n), tuple(encode_t_layers(t, n)), (), tuple(cz + t))


def test_gray_code_three_bits():
    assert [gray_code(k) for k in range(8)] == [0, 1, 3, 2, 6, 7, 5, 4]


@pytest.mark.parametrize("k", [1, 5, 12])
def test_gray_code_neighbours_differ_in_one_bit(k):
    codes = [gray_code(i) for i in range(1 << k)]
    assert sorted(codes) == list(range(1 << k))
    assert all(bin(a ^ b).count("1") == 1 for a, b in zip(codes, codes[1:] + codes[:1]))


def test_t_octant_counts_matching_bits():
    assert t_phase_octant([0b1011, 0b0011], 0b0111) == 4
    assert t_phase_octant([0b1111] * 9, 0b1) == 1


def test_cz_sign_complete_graph():
    cz = encode_cz_masks([Gate(GateKind.CZ, (a, b)) for a in range(4) for b in range(a + 1, 4)], 4)
    for j in range(16):
        w = bin(j).count("1")
        assert cz_sign(cz, j) == (-1) ** (w * (w - 1) // 2)


@pytest.mark.parametrize("n", range(3, 15))
def test_block_signs_match_naive_on_every_block(n):
    rng = np.random.default_rng(n)
    for _ in range(2):
        cz = encode_cz_masks(random_diagonal_gates(n, rng)[0], n)
        for blk in range(1 << (n - 3)):
            expect = sum(1 << r for r in range(8) if cz_sign(cz, 8 * blk + r) < 0)
            assert cz_signs_for_block(cz, blk) == expect
            assert cz_signs_for_block(cz, blk, gray_codes=False) == expect


@pytest.mark.parametrize("n", range(1, 11))
def test_fused_pass_matches_per_gate_reference(n):
    rng = np.random.default_rng(100 + n)
    psi = random_state(n, rng)
    for _ in range(10):
        cz, t = random_diagonal_gates(n, rng)
        ref = oracle_run(Circuit(n, tuple(cz + t)), psi)
        for gray in (True, False):
            sv = from_array(psi)
            apply_diagonal_pass(sv, diagonal_pass(cz, t, n), gray_codes=gray)
            assert np.max(np.abs(sv.amplitudes() - ref)) <= 1e-6


@given(st.integers(11, 14), st.integers(0, 2**32 - 1))
def test_ranges_compose_to_the_whole_pass(n, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    cz, t = random_diagonal_gates(n, rng)
    dpass = diagonal_pass(cz, t, n)
    whole = from_array(psi)
    apply_diagonal_pass(whole, dpass)
    step = 1 << prepare_diagonal(dpass, n).block_bits
    parts = from_array(psi)
    for start in range(0, 1 << n, step):
        apply_diagonal_pass(parts, dpass, range=(start, start + step))
    assert np.array_equal(whole.amps, parts.amps)


def test_block_size_and_range_alignment():
    n = 12
    dpass = diagonal_pass([Gate(GateKind.CZ, (0, 1))], [], n)
    assert prepare_diagonal(dpass, n).block_bits == MIN_BLOCK_BITS
    with pytest.raises(ValueError):
        apply_diagonal_pass(from_array(np.ones(1 << n)), dpass, range=(3, 1 << n))


def test_eight_t_layers_restore_the_state_exactly():
    n = 9
    psi = random_state(n, np.random.default_rng(0))
    sv = from_array(psi)
    dpass = diagonal_pass([], [Gate(GateKind.T, (q,)) for q in range(n)], n)
    for _ in range(8):
        apply_diagonal_pass(sv, dpass)
    assert np.allclose(sv.amplitudes(), psi, atol=1e-6)


def test_empty_pass_leaves_state_unwritten():
    n = 11
    sv = from_array(random_state(n, np.random.default_rng(1)))
    before = sv.amps.copy()
    apply_diagonal_pass(sv, diagonal_pass([], [], n))
    assert np.array_equal(sv.amps, before)

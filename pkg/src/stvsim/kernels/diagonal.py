"""Diagonal clusters (CZ masks and T layers) applied in one pass over the state.

Per 8-amplitude group the CZ signs come from a Gray-code walk: flipping bit
``t`` of ``j`` changes the number of active CZ gates by
``popcount(m_t & j)``, so one masked popcount per amplitude suffices. The
parity at the start of each group depends on its index alone. It is the
parity of the enclosing block start, a per-pass table entry for the offset
inside the block, and one masked popcount for the CZ gates that cross
between the two. Groups are therefore independent of each other and of how
work is split.

The T octant of ``j`` is the sum over layers of ``popcount(mask & j)``. A
negative CZ sign adds 4, so each amplitude gets one rotation by
``omega**k``. Even ``k`` is a swap and/or negation; odd ``k`` adds the
components and multiplies by ``1/sqrt 2``. Octants are computed for a whole
block first and applied in one branch-free sweep; a block whose octants are
all zero is not written.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._bits import ctz, popcount
from .dense import apply_op_region

__all__ = [
    "gray_code",
    "t_phase_octant",
    "cz_sign",
    "cz_signs_for_block",
    "DiagonalPayload",
    "prepare_diagonal",
    "apply_diagonal_range",
    "apply_diagonal_pass",
]


MIN_BLOCK_BITS = 10


def gray_code(k: int) -> int:
    return k ^ (k >> 1)


def t_phase_octant(t_layers, j: int) -> int:
    """``sum(popcount(mask & j)) mod 8`` over the layers (TLayer objects or ints)."""
    return sum(bin(_mask(t) & j).count("1") for t in t_layers) % 8


def cz_sign(cz, j: int) -> int:
    """-1 if an odd number of the cluster's CZ gates have both bits set in ``j``."""
    masks = _masks(cz)
    g = sum(bin(masks[k] & j).count("1") for k in range(len(masks)) if j >> k & 1)
    return -1 if g & 2 else 1


def cz_signs_for_block(cz, block_idx: int, gray_codes: bool = True) -> int:
    """Bit ``r`` set iff amplitude ``8 * block_idx + r`` gets a -1 from the cluster."""
    masks = np.asarray(_masks(cz), dtype=np.int64)
    if masks.size == 0:
        return 0
    if gray_codes:
        return int(_block_signs_gray(masks, np.int64(8 * block_idx)))
    return int(_block_signs_naive(masks, np.int64(8 * block_idx)))


def _mask(t) -> int:
    return t.mask if hasattr(t, "mask") else int(t)


def _masks(cz):
    return cz.masks if hasattr(cz, "masks") else cz


@njit(nogil=True, cache=True)
def _parity_naive(masks, j):
    # twice the number of active gates: each gate is seen from both ends
    g = 0
    x = j
    while x:
        k = ctz(x)
        g += popcount(masks[k] & j)
        x &= x - 1
    return (g >> 1) & 1


@njit(nogil=True, cache=True)
def _block_signs_gray(masks, j0):
    par = _parity_naive(masks, j0)
    out = par
    j = j0
    for step in range(1, 8):
        t = ctz(step)
        if t < masks.size:
            par ^= popcount(masks[t] & j) & 1
        j ^= 1 << t
        out |= par << (j - j0)
    return out


@njit(nogil=True, cache=True)
def _block_signs_naive(masks, j0):
    out = 0
    for r in range(8):
        out |= _parity_naive(masks, j0 + r) << r
    return out


@njit(nogil=True, cache=True, inline="always")
def _rotate(v, j, k, c):
    # times omega**k: a quarter-turn swap/negate, then (x - y, x + y) / sqrt 2 for odd k
    re = v[2 * j]
    im = v[2 * j + 1]
    e = k >> 1
    x = im if e & 1 else re
    y = re if e & 1 else im
    x = -x if e == 1 or e == 2 else x
    y = -y if e >= 2 else y
    xo = (x - y) * c
    yo = (x + y) * c
    v[2 * j] = xo if k & 1 else x
    v[2 * j + 1] = yo if k & 1 else y


@njit(nogil=True, cache=True)
def _rotate_all(w, ks, c):
    for r in range(ks.size):
        _rotate(w, r, ks[r], c)


@njit(nogil=True, cache=True)
def _rotate_block(v, b, ks, c):
    # the block goes in as its own view so the loop vectorizes
    _rotate_all(v[2 * b : 2 * (b + ks.size)], ks, c)


@njit(nogil=True, cache=True)
def _octants(cz, t, low_oct, tab, b, ks, gray):
    """Octants of the amplitudes ``b .. b + ks.size``; returns their OR."""
    step = ks.size
    has_cz = cz.size > 0
    tB = 0
    for m in t:
        tB += popcount(m & b)
    # CZ parity of b + l splits into parts from b, from l, and edges between them
    pB = 0
    cm = 0
    if has_cz:
        pB = _parity_naive(cz, b)
        for q in range(3, ctz(step)):
            cm |= (popcount(cz[q] & b) & 1) << q
    acc = 0
    for l in range(0, step, 8):
        j = b + l
        tb = tB
        for m in t:
            tb += popcount(m & l)
        signs = 0
        if has_cz:
            if gray:
                par = pB ^ tab[l >> 3] ^ (popcount(cm & l) & 1)
                signs = par
                jj = j
                for st in range(1, 8):
                    tt = ctz(st)
                    par ^= popcount(cz[tt] & jj) & 1
                    jj ^= 1 << tt
                    signs |= par << (jj - j)
            else:
                for r in range(8):
                    signs |= _parity_naive(cz, j + r) << r
        for r in range(8):
            k = (tb + low_oct[r] + 4 * ((signs >> r) & 1)) & 7
            ks[l + r] = k
            acc |= k
    return acc


@njit(nogil=True, cache=True)
def _diagonal_blocks(v, j0, j1, cz, t, low_oct, tab, bbits, bits, codes, rot, gray, lanes):
    c = np.float32(0.7071067811865476)
    size = v.size // 2
    step = 1 << bbits
    fused = bits.shape[0]
    if size < 8:
        # fewer than three qubits: no 8-amplitude groups, evaluate directly
        for j in range(j0, j1):
            k = 0
            for m in t:
                k += popcount(m & j)
            if cz.size > 0:
                k += 4 * _parity_naive(cz, j)
            _rotate(v, j, k & 7, c)
    else:
        ks = np.empty(step, dtype=np.int32)
        for b in range(j0, j1, step):
            # a block whose octants are all zero is left unwritten
            if _octants(cz, t, low_oct, tab, b, ks, gray):
                _rotate_block(v, b, ks, c)
    for b in range(j0, j1, step):
        for f in range(fused):
            apply_op_region(v, b, bbits, bits[f, 0], bits[f, 1], codes[f], rot[f],
                            lanes, 0, 1)


class DiagonalPayload:
    """Arrays the diagonal kernel needs, built once per pass."""

    def __init__(self, n, cz_masks, t_masks, bits, codes, rot, rt2_exp, i_exp):
        self.n = n
        self.cz = np.asarray(cz_masks if any(cz_masks) else [], dtype=np.int64)
        self.t = np.asarray(t_masks, dtype=np.int64)
        self.low_oct = np.array(
            [sum(bin(int(m) & r).count("1") for m in t_masks) for r in range(8)],
            dtype=np.int64,
        )
        self.bits, self.codes, self.rot = bits, codes, rot
        self.rt2_exp, self.i_exp = rt2_exp, i_exp
        top = int(bits[:, 0].max()) + 1 if bits.shape[0] else 0
        # blocks hold every fused op whole and are large enough that the
        # per-block setup is amortized
        self.block_bits = min(n, max(MIN_BLOCK_BITS, top))
        # CZ parity of each 8-group start inside a block, relative to the block
        local = 1 << max(0, self.block_bits - 3)
        self.tab = np.zeros(local, dtype=np.int64)
        if self.cz.size and n >= 3:
            self.tab[:] = [_parity_naive(self.cz, np.int64(l << 3)) for l in range(local)]

    @property
    def num_blocks(self) -> int:
        return 1 << (self.n - self.block_bits)


def prepare_diagonal(dpass, n: int) -> DiagonalPayload:
    bits, codes, rot, e, s = dpass.encoded()
    return DiagonalPayload(
        n, list(dpass.cz.masks), [t.mask for t in dpass.t_layers], bits, codes, rot, e, s
    )


def apply_diagonal_range(v, payload: DiagonalPayload, block0: int, block1: int,
                         gray_codes: bool = True, aligned_lanes: bool = True) -> None:
    """Run blocks ``[block0, block1)`` of the pass; scale bookkeeping is the caller's."""
    step = 1 << payload.block_bits
    _diagonal_blocks(
        v, block0 * step, block1 * step, payload.cz, payload.t, payload.low_oct,
        payload.tab, payload.block_bits, payload.bits, payload.codes, payload.rot,
        bool(gray_codes), bool(aligned_lanes),
    )


def apply_diagonal_pass(sv, dpass, range=None, gray_codes: bool = True,
                        aligned_lanes: bool = True) -> None:
    """Apply a :class:`DiagonalPass` to ``sv``.

    ``range`` is a ``(start, stop)`` amplitude interval aligned to the pass
    block size; without it the whole state is processed and the scale of
    the fused ops is recorded.
    """
    payload = prepare_diagonal(dpass, sv.n)
    if range is None:
        apply_diagonal_range(sv.view, payload, 0, payload.num_blocks, gray_codes, aligned_lanes)
        sv.scale.add(payload.rt2_exp, payload.i_exp)
        return
    start, stop = range
    step = 1 << payload.block_bits
    if start % step or stop % step or not 0 <= start <= stop <= sv.amps.size:
        raise ValueError(f"range must be aligned to {step} amplitudes")
    apply_diagonal_range(sv.view, payload, start // step, stop // step, gray_codes, aligned_lanes)

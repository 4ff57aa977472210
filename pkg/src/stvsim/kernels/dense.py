"""Non-diagonal kernels.

Two families live here. The generic kernels multiply by an arbitrary complex
2x2 or 4x4 matrix and walk index sets with block-skip loops; they are the
fallback and the reference. The paired kernels apply one or two one-qubit
gates whose reduced matrices have entries in {0, +-1, +-i}, so each output is
built from component swaps, negations and additions only.

Paired-op encoding (produced by the planner):

``bits``   int64[k, 2]  (hb, lb) bit positions, ``lb = -1`` for a single gate.
``codes``  int64[k, 8]  term codes for the hb factor then the lb factor, in
                        row-major order (g00, g01, g10, g11).
``rot``    int64[k]     1 when the op carries a leftover (1+i) factor.

A term code describes multiplication by a unit or zero: bit 0 keeps the term,
bit 1 swaps re/im, bits 2 and 3 negate the resulting re and im parts. So 1 is
``+1``, 13 is ``-1``, 7 is ``+i`` and 11 is ``-i``.

Numba notes: indices are unsigned so LLVM drops the negative-index wraparound
path, and every contiguous loop either keeps its partner offset equal to its
trip count or reads the partner through a separate array view. Both forms let
the loop vectorizer prove the two streams disjoint.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "first_index_set",
    "apply_1q_generic",
    "apply_2q_generic",
    "term_code",
    "apply_pair_kernel",
    "apply_op_region",
    "apply_ops_region",
    "recursive_transform",
    "SWEEP_BITS",
    "SEG_BITS",
]

SWEEP_BITS = 16
SEG_BITS = 11

U = np.uint64


def term_code(z: complex) -> int:
    """Code of the unit (or zero) Gaussian integer ``z``."""
    z = complex(z)
    table = {1: 1, -1: 13, 1j: 7, -1j: 11, 0: 0}
    if z not in table:
        raise ValueError(f"{z} is not a unit or zero")
    return table[z]


def first_index_set(n: int, gate_bitmask: int) -> list[int]:
    """Indices of set id 0 for the gate bits in ``gate_bitmask``, by doubling."""
    if not 1 <= bin(gate_bitmask).count("1") <= 2 or gate_bitmask >> n:
        raise ValueError("gate bitmask must select one or two of the n bits")
    out = [0]
    for b in range(n):
        if gate_bitmask >> b & 1:
            out = out + [x + (1 << b) for x in out]
    return out


# generic kernels


@njit(nogil=True, cache=True)
def _share(total, part, nparts):
    return total * part // nparts, total * (part + 1) // nparts


@njit(nogil=True, cache=True)
def _apply_1q_generic(v, bit, m, part, nparts):
    half = 1 << bit
    size = v.size // 2
    m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    nblk = size // (2 * half)
    # shares split the blocks, or the pairs inside each block when blocks are few
    if nblk >= nparts:
        b0, b1 = _share(nblk, part, nparts)
        r0, r1 = 0, half
    else:
        b0, b1 = 0, nblk
        r0, r1 = _share(half, part, nparts)
    for blk in range(b0 * 2 * half, b1 * 2 * half, 2 * half):
        for j in range(blk + r0, blk + r1):
            a = complex(v[2 * j], v[2 * j + 1])
            b = complex(v[2 * (j + half)], v[2 * (j + half) + 1])
            x = m00 * a + m01 * b
            y = m10 * a + m11 * b
            v[2 * j] = x.real
            v[2 * j + 1] = x.imag
            v[2 * (j + half)] = y.real
            v[2 * (j + half) + 1] = y.imag


def apply_1q_generic(sv, bit: int, matrix, part: int = 0, nparts: int = 1,
                     record_scale: bool = True) -> None:
    """Multiply the pair (j, j + 2**bit) by ``matrix`` for every j with that bit clear.

    ``matrix`` is a :class:`ScaledGaussianMatrix`, an :class:`OctantDiagonal`,
    or any 2x2 complex array. Share ``part`` of ``nparts`` is processed; the
    matrix scale goes to ``sv.scale`` unless ``record_scale`` is off.
    """
    m, e, s = _numeric(matrix)
    _apply_1q_generic(sv.view, int(bit), m.astype(np.complex64), part, nparts)
    if record_scale:
        sv.scale.add(e, s)


@njit(nogil=True, cache=True)
def _apply_2q_generic(v, b0, b1, m, part, nparts):
    size = v.size // 2
    mask = (1 << b0) | (1 << b1)
    off = np.empty(4, dtype=np.int64)
    off[0] = 0
    off[1] = 1 << b1
    off[2] = 1 << b0
    off[3] = off[1] + off[2]
    a = np.empty(4, dtype=np.complex64)
    idx, stop = _share(size, part, nparts)
    while idx < stop:
        hit = idx & mask
        if hit:
            # jump past the block where a gate bit is set; clearing the bits
            # below it keeps the jump right when a share starts mid-block
            low = hit & -hit
            idx = (idx + low) & ~(low - 1)
            continue
        for r in range(4):
            k = idx + off[r]
            a[r] = complex(v[2 * k], v[2 * k + 1])
        for r in range(4):
            acc = m[r, 0] * a[0] + m[r, 1] * a[1] + m[r, 2] * a[2] + m[r, 3] * a[3]
            k = idx + off[r]
            v[2 * k] = acc.real
            v[2 * k + 1] = acc.imag
        idx += 1


def apply_2q_generic(sv, bits: tuple[int, int], matrix, part: int = 0, nparts: int = 1,
                     record_scale: bool = True) -> None:
    """Multiply each 4-amplitude index set by ``matrix``.

    The local index is ``2 * bit(bits[0]) + bit(bits[1])``, so ``bits[0]``
    plays the role of the first (more significant) tensor factor.
    """
    b0, b1 = int(bits[0]), int(bits[1])
    if b0 == b1:
        raise ValueError("two-qubit gate needs distinct qubits")
    m, e, s = _numeric(matrix)
    _apply_2q_generic(sv.view, b0, b1, m.astype(np.complex64), part, nparts)
    if record_scale:
        sv.scale.add(e, s)


def _numeric(matrix):
    if hasattr(matrix, "entries"):
        return np.array(matrix.entries, dtype=np.complex128), matrix.rt2_exp, matrix.i_exp
    if hasattr(matrix, "octants"):
        return matrix.to_numpy(), 0, 0
    return np.asarray(matrix, dtype=np.complex128), 0, 0


# multiply-free butterflies


@njit(nogil=True, cache=True, inline="always")
def _term(c, zr, zi):
    a = zi if c & 2 else zr
    b = zr if c & 2 else zi
    a = -a if c & 4 else a
    b = -b if c & 8 else b
    z = np.float32(0)
    return (a if c & 1 else z), (b if c & 1 else z)


@njit(nogil=True, cache=True, inline="always")
def _bf(x, i, y, k, c0, c1, c2, c3, rot):
    # (x[i], y[k]) <- G (x[i], y[k]), then optionally times (1+i)
    two = U(2)
    one = U(1)
    xr = x[two * i]
    xi = x[two * i + one]
    yr = y[two * k]
    yi = y[two * k + one]
    p0r, p0i = _term(c0, xr, xi)
    p1r, p1i = _term(c1, yr, yi)
    q0r, q0i = _term(c2, xr, xi)
    q1r, q1i = _term(c3, yr, yi)
    ar = p0r + p1r
    ai = p0i + p1i
    br = q0r + q1r
    bi = q0i + q1i
    if rot:
        ar, ai = ar - ai, ar + ai
        br, bi = br - bi, br + bi
    x[two * i] = ar
    x[two * i + one] = ai
    y[two * k] = br
    y[two * k + one] = bi


@njit(nogil=True, cache=True)
def _groups_any(v, base, L, ngroups, c0, c1, c2, c3, rot):
    # groups of 2L amplitudes, butterflies (j, j + L); trip count == offset
    L = U(L)
    for g in range(U(ngroups)):
        b = U(base) + U(2) * L * g
        for r in range(L):
            _bf(v, b + r, v, b + r + L, c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _groups_1(v, base, ngroups, c0, c1, c2, c3, rot):
    for g in range(U(ngroups)):
        j = U(base) + U(2) * g
        _bf(v, j, v, j + U(1), c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _groups_2(v, base, ngroups, c0, c1, c2, c3, rot):
    for g in range(U(ngroups)):
        j = U(base) + U(4) * g
        _bf(v, j, v, j + U(2), c0, c1, c2, c3, rot)
        _bf(v, j + U(1), v, j + U(3), c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _groups_4(v, base, ngroups, c0, c1, c2, c3, rot):
    for g in range(U(ngroups)):
        j = U(base) + U(8) * g
        _bf(v, j, v, j + U(4), c0, c1, c2, c3, rot)
        _bf(v, j + U(1), v, j + U(5), c0, c1, c2, c3, rot)
        _bf(v, j + U(2), v, j + U(6), c0, c1, c2, c3, rot)
        _bf(v, j + U(3), v, j + U(7), c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _groups_8(v, base, ngroups, c0, c1, c2, c3, rot):
    for g in range(U(ngroups)):
        j = U(base) + U(16) * g
        for r in range(U(8)):
            _bf(v, j + r, v, j + r + U(8), c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _groups(v, base, L, ngroups, c0, c1, c2, c3, rot, lanes):
    """Butterflies on (j, j + L) for every j in ``ngroups`` consecutive 2L-groups."""
    if lanes and L < 16:
        # in-register variants for gates whose partner lies in the same cache line
        if L == 1:
            _groups_1(v, base, ngroups, c0, c1, c2, c3, rot)
        elif L == 2:
            _groups_2(v, base, ngroups, c0, c1, c2, c3, rot)
        elif L == 4:
            _groups_4(v, base, ngroups, c0, c1, c2, c3, rot)
        else:
            _groups_8(v, base, ngroups, c0, c1, c2, c3, rot)
    else:
        _groups_any(v, base, L, ngroups, c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _views(x, y, count, c0, c1, c2, c3, rot):
    for r in range(U(count)):
        _bf(x, r, y, r, c0, c1, c2, c3, rot)


@njit(nogil=True, cache=True)
def _partners(v, i0, k0, count, c0, c1, c2, c3, rot):
    """Butterflies on (i0 + r, k0 + r), reading the partner through its own view."""
    _views(
        v[2 * i0 : 2 * (i0 + count)],
        v[2 * k0 : 2 * (k0 + count)],
        count, c0, c1, c2, c3, rot,
    )


@njit(nogil=True, cache=True)
def apply_op_region(v, base, rbits, hb, lb, cd, rot, lanes, part, nparts):
    """Apply one op to the region ``[base, base + 2**rbits)``.

    Work is split into ``nparts`` disjoint shares; this call does share
    ``part``. Shares never overlap, so they can run on separate threads.
    """
    seg = 1 << SEG_BITS
    size = 1 << rbits
    H = 1 << hb
    if lb < 0:
        if 2 * H <= seg:
            span = min(size, seg)
            s0, s1 = _share(size // span, part, nparts)
            for s in range(s0, s1):
                _groups(v, base + s * span, H, span // (2 * H),
                        cd[0], cd[1], cd[2], cd[3], rot, lanes)
            return
        nblk = size // (2 * H)
        nseg = H // seg
        u0, u1 = _share(nblk * nseg, part, nparts)
        for u in range(u0, u1):
            b = base + (u // nseg) * 2 * H + (u % nseg) * seg
            _partners(v, b, b + H, seg, cd[0], cd[1], cd[2], cd[3], rot)
        return
    L = 1 << lb
    if 2 * H <= seg:
        span = min(size, seg)
        s0, s1 = _share(size // span, part, nparts)
        for s in range(s0, s1):
            b = base + s * span
            _groups(v, b, L, span // (2 * L), cd[4], cd[5], cd[6], cd[7], 0, lanes)
            _groups(v, b, H, span // (2 * H), cd[0], cd[1], cd[2], cd[3], rot, lanes)
        return
    nblk = size // (2 * H)
    if 2 * L <= seg // 2:
        # both halves of a segment hold whole lo groups
        half = seg // 2
        nseg = H // half
        u0, u1 = _share(nblk * nseg, part, nparts)
        for u in range(u0, u1):
            b = base + (u // nseg) * 2 * H + (u % nseg) * half
            _groups(v, b, L, half // (2 * L), cd[4], cd[5], cd[6], cd[7], 0, lanes)
            _groups(v, b + H, L, half // (2 * L), cd[4], cd[5], cd[6], cd[7], 0, lanes)
            _partners(v, b, b + H, half, cd[0], cd[1], cd[2], cd[3], rot)
        return
    # large lb: four partner views per segment
    q = min(seg // 2, L)
    nm = H // (2 * L)
    nseg = L // q
    u0, u1 = _share(nblk * nm * nseg, part, nparts)
    for u in range(u0, u1):
        blk = u // (nm * nseg)
        rest = u % (nm * nseg)
        b = base + blk * 2 * H + (rest // nseg) * 2 * L + (rest % nseg) * q
        _partners(v, b, b + L, q, cd[4], cd[5], cd[6], cd[7], 0)
        _partners(v, b + H, b + H + L, q, cd[4], cd[5], cd[6], cd[7], 0)
        _partners(v, b, b + H, q, cd[0], cd[1], cd[2], cd[3], rot)
        _partners(v, b + L, b + H + L, q, cd[0], cd[1], cd[2], cd[3], rot)


@njit(nogil=True, cache=True)
def apply_ops_region(v, base, rbits, bits, codes, rot, lanes, k0, k1):
    """Apply ops ``k0 .. k1-1`` in order over one region, single share."""
    for k in range(k0, k1):
        apply_op_region(v, base, rbits, bits[k, 0], bits[k, 1], codes[k], rot[k],
                        lanes, 0, 1)


@njit(nogil=True, cache=True)
def _rt(v, base, rbits, bits, codes, rot, level, sweep_bits, lanes):
    nops = bits.shape[0]
    while level < nops:
        if rbits <= sweep_bits:
            apply_ops_region(v, base, rbits, bits, codes, rot, lanes, level, nops)
            return 0
        cb = bits[level, 0] + 1
        if cb < rbits:
            # smallest chunks that still contain the most significant pending op
            step = 1 << cb
            for c in range(1 << (rbits - cb)):
                _rt(v, base + c * step, cb, bits, codes, rot, level, sweep_bits, lanes)
            return 0
        apply_op_region(v, base, rbits, bits[level, 0], bits[level, 1],
                        codes[level], rot[level], lanes, 0, 1)
        level += 1
    return 0


@njit(nogil=True, cache=True)
def recursive_transform(v, base, rbits, bits, codes, rot, level, sweep_bits, lanes):
    """Cache-blocked application of ops sorted by descending hb.

    An op whose hb spans the region is applied across it; the region is then
    cut into the smallest chunks that still hold the next op, and each chunk
    is finished while it is cache resident. Regions of at most
    ``2**sweep_bits`` amplitudes are finished with plain sweeps.
    """
    return _rt(v, base, rbits, bits, codes, rot, level, sweep_bits, lanes)


def apply_pair_kernel(sv, op, part: int = 0, nparts: int = 1, aligned_lanes: bool = True,
                      record_scale: bool = True) -> None:
    """Apply a paired op (anything with ``encode()``) to share ``part`` of the state."""
    hb, lb, codes, rot, e, s = op.encode()
    apply_op_region(sv.view, 0, sv.n, hb, lb, codes, rot, bool(aligned_lanes), part, nparts)
    if record_scale:
        sv.scale.add(e, s)

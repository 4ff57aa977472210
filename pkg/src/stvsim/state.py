"""Amplitude storage with a carried global scale.

The physical state is ``amps * (1/sqrt 2)**p * i**s``. Kernels only ever add,
subtract, swap and negate, pushing the ``1/sqrt 2`` factors of H, X½ and Y½
into ``p``; :func:`flush_scale` folds the factor back in once ``p`` grows
large enough to threaten the float32 exponent range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "ScaleState",
    "StateVector",
    "AlignmentError",
    "init_basis",
    "init_superposition",
    "from_array",
    "flush_scale",
    "norm",
    "read_amplitude",
    "sample_measurement",
    "dump",
    "NORM_BLOCK",
    "MAX_QUBITS",
]

ALIGN = 64
NORM_BLOCK = 4096
MAX_QUBITS = 34
DUMP_ALL_LIMIT = 26


class AlignmentError(RuntimeError):
    pass


@dataclass
class ScaleState:
    p: int = 0
    s: int = 0

    def add(self, rt2_exp: int, i_exp: int) -> None:
        self.p += int(rt2_exp)
        self.s = (self.s + int(i_exp)) % 4

    @property
    def factor(self) -> complex:
        return (2.0 ** (-self.p / 2)) * (1j**self.s)


@dataclass
class StateVector:
    n: int
    amps: np.ndarray
    scale: ScaleState = field(default_factory=ScaleState)

    @property
    def view(self) -> np.ndarray:
        """Interleaved float32 (re, im) view used by the kernels."""
        return self.amps.view(np.float32)

    def amplitudes(self) -> np.ndarray:
        """All amplitudes with the scale applied, as complex128."""
        return self.amps.astype(np.complex128) * self.scale.factor

    def copy(self) -> "StateVector":
        out = _alloc(self.n)
        out[:] = self.amps
        return StateVector(self.n, out, ScaleState(self.scale.p, self.scale.s))


def _alloc(n: int) -> np.ndarray:
    """Zeroed complex64 array of length 2**n whose data starts on a 64-byte boundary.

    ``np.zeros`` maps fresh zero pages lazily, so nothing is touched until the
    kernels write.
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    nbytes = (1 << n) * 8
    raw = np.zeros(nbytes + ALIGN, dtype=np.uint8)
    offset = (-raw.ctypes.data) % ALIGN
    amps = raw[offset : offset + nbytes].view(np.complex64)
    if amps.ctypes.data % ALIGN:
        raise AlignmentError("could not align amplitude array")
    return amps


def init_basis(n: int) -> StateVector:
    amps = _alloc(n)
    amps[0] = 1
    return StateVector(n, amps)


def init_superposition(n: int) -> StateVector:
    """The state after H on every qubit of |0...0>: all stored ones, ``p = n``."""
    amps = _alloc(n)
    _fill(amps.view(np.float32), np.float32(1), np.float32(0))
    return StateVector(n, amps, ScaleState(n, 0))


def from_array(vec) -> StateVector:
    """Load an arbitrary complex vector of length 2**n with ``p = s = 0``."""
    vec = np.asarray(vec)
    n = int(vec.size).bit_length() - 1
    if vec.ndim != 1 or vec.size != 1 << n:
        raise ValueError("length must be a power of two")
    amps = _alloc(n)
    amps[:] = vec
    return StateVector(n, amps)


@njit(nogil=True, cache=True)
def _fill(v, re, im):
    for j in range(v.size // 2):
        v[2 * j] = re
        v[2 * j + 1] = im


@njit(nogil=True, cache=True)
def _scale_kernel(v, cr, ci):
    # rounding happens once per component, after a float64 product
    for j in range(v.size // 2):
        re = np.float64(v[2 * j])
        im = np.float64(v[2 * j + 1])
        v[2 * j] = np.float32(re * cr - im * ci)
        v[2 * j + 1] = np.float32(re * ci + im * cr)


def flush_scale(sv: StateVector, threshold: int = 101, force: bool = False) -> bool:
    """Fold ``(1/sqrt 2)**p * i**s`` into the amplitudes once ``p >= threshold``.

    Returns True if a flush happened.
    """
    if not force and sv.scale.p < threshold:
        return False
    if sv.scale.p == 0 and sv.scale.s == 0:
        return False
    c = sv.scale.factor
    _scale_kernel(sv.view, c.real, c.imag)
    sv.scale = ScaleState(0, 0)
    return True


@njit(nogil=True, cache=True)
def _block_sums(v, block):
    count = v.size // 2
    nblocks = max(1, count // block)
    out = np.zeros(nblocks, dtype=np.float64)
    size = min(block, count)
    for b in range(nblocks):
        acc = 0.0
        base = 2 * b * size
        for k in range(2 * size):
            x = np.float64(v[base + k])
            acc += x * x
        out[b] = acc
    return out


@njit(nogil=True, cache=True)
def _tree_sum(x):
    # pairwise reduction with a shape fixed by len(x) alone
    buf = x.copy()
    m = buf.size
    while m > 1:
        half = m // 2
        for k in range(half):
            buf[k] = buf[2 * k] + buf[2 * k + 1]
        if m % 2:
            buf[half] = buf[m - 1]
            m = half + 1
        else:
            m = half
    return buf[0]


@njit(nogil=True, cache=True)
def _compensated_sum(v):
    # Neumaier summation: a (sum, error) pair carried in float64
    s = 0.0
    c = 0.0
    for k in range(v.size):
        x = np.float64(v[k])
        x = x * x
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


@njit(nogil=True, cache=True)
def _naive32_sum(v):
    s = np.float32(0)
    for k in range(v.size):
        s += v[k] * v[k]
    return s


def norm(sv: StateVector, method: str = "tree") -> float:
    """Squared 2-norm of the physical state, ``2**-p * sum |amps|**2``.

    ``tree`` (default) sums 4096-amplitude blocks in float64 and combines
    the block sums pairwise, so the result does not depend on how work is
    split. ``compensated`` carries a float64 error term; ``naive32`` is a
    left-to-right float32 sum kept for comparison.
    """
    v = sv.view
    if method == "tree":
        total = _tree_sum(_block_sums(v, NORM_BLOCK))
    elif method == "compensated":
        total = _compensated_sum(v)
    elif method == "naive32":
        total = float(_naive32_sum(v))
    else:
        raise ValueError(f"unknown norm method {method!r}")
    return float(total) * 2.0 ** (-sv.scale.p)


def read_amplitude(sv: StateVector, j: int) -> complex:
    if not 0 <= j < sv.amps.size:
        raise IndexError(f"amplitude index {j} out of range for {sv.n} qubits")
    return complex(sv.amps[j]) * sv.scale.factor


def _bitstring(j: int, n: int) -> str:
    return format(j, f"0{n}b")


def sample_measurement(sv: StateVector, seed, shots: int, tol: float = 1e-3) -> list[str]:
    """Draw ``shots`` computational-basis outcomes; bit k of each string is qubit k.

    Sampling is two-level: a block is chosen from float64 block weights, then
    an index inside it.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    nrm = norm(sv)
    if abs(nrm - 1) > tol:
        raise ValueError(f"state norm {nrm:.6g} is not within {tol} of 1")
    if shots == 0:
        return []
    rng = np.random.default_rng(seed)
    v = sv.view
    weights = _block_sums(v, NORM_BLOCK)
    cum = np.cumsum(weights)
    u = rng.random(shots) * cum[-1]
    blocks = np.minimum(np.searchsorted(cum, u, side="right"), cum.size - 1)
    size = min(NORM_BLOCK, sv.amps.size)
    result = np.empty(shots, dtype=np.int64)
    for b in np.unique(blocks):
        sel = np.nonzero(blocks == b)[0]
        chunk = sv.amps[b * size : (b + 1) * size]
        p = np.abs(chunk.astype(np.complex128)) ** 2
        inner = np.cumsum(p)
        r = rng.random(sel.size) * inner[-1]
        idx = np.minimum(np.searchsorted(inner, r, side="right"), size - 1)
        result[sel] = b * size + idx
    return [_bitstring(int(j), sv.n) for j in result]


def dump(sv: StateVector, indices="all") -> str:
    """``<bitstring> <re> <im>`` lines with 9 significant digits."""
    if isinstance(indices, str):
        if indices != "all":
            raise ValueError("indices must be a list or 'all'")
        if sv.n > DUMP_ALL_LIMIT:
            raise ValueError(f"refusing to dump all amplitudes above {DUMP_ALL_LIMIT} qubits")
        indices = range(sv.amps.size)
    lines = []
    for j in indices:
        a = read_amplitude(sv, int(j))
        lines.append(f"{_bitstring(int(j), sv.n)} {a.real:.9g} {a.imag:.9g}")
    return "\n".join(lines) + ("\n" if lines else "")


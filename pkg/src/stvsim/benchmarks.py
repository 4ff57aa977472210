"""Random grid circuits in the style of the supremacy benchmark files, and small random circuits.

Grid layout: qubit ``(r, c)`` has index ``r * cols + c``. Couplers are split
into eight patterns, four horizontal and four vertical:

* horizontal ``H(o)``: ``(r, c)-(r, c+1)`` with ``c % 4 == (o + 2 * (r % 2)) % 4``
* vertical ``V(o)``: ``(r, c)-(r+1, c)`` with ``r % 4 == (o + 2 * (c % 2)) % 4``

Each coupler belongs to exactly one pattern. The cycle order below gives
two-qubit counts of 78, 123, 130, 161 and 168 for the 4x4, 4x6, 5x5, 5x6
and 4x8 grids at depth 26, the counts published for those benchmark sizes.

One-qubit gates follow the benchmark rules: a qubit gets a gate in cycle
``t`` iff it was in a CZ at ``t - 1`` and is free at ``t``; its first such
gate is T, later ones are drawn from {X½, Y½, T} and differ from its previous
one. Cycle 0 is H on every qubit and a final cycle repeats it.
"""

from __future__ import annotations

import random
from importlib import resources

from .circuit import Circuit, Gate, GateKind, read_circuit, parse_circuit

__all__ = [
    "PATTERN_ORDER",
    "grid_couplers",
    "grid_circuit",
    "random_circuit",
    "bundled_circuit",
    "BUNDLED",
]

# (orientation, offset) per cycle, repeating with period 8
PATTERN_ORDER = (("h", 0), ("v", 1), ("h", 1), ("h", 2), ("h", 3), ("v", 0), ("v", 2), ("v", 3))

BUNDLED = {
    "grid_4x4_d26": "grid_4x4_d26.txt",
    "grid_4x5_d26": "grid_4x5_d26.txt",
    "grid_4x6_d26": "grid_4x6_d26.txt",
}


def grid_couplers(rows: int, cols: int, orientation: str, offset: int) -> list[tuple[int, int]]:
    out = []
    for r in range(rows):
        for c in range(cols):
            if orientation == "h" and c + 1 < cols and c % 4 == (offset + 2 * (r % 2)) % 4:
                out.append((r * cols + c, r * cols + c + 1))
            if orientation == "v" and r + 1 < rows and r % 4 == (offset + 2 * (c % 2)) % 4:
                out.append((r * cols + c, (r + 1) * cols + c))
    return out


def grid_circuit(rows: int, cols: int, depth: int = 26, seed: int = 0,
                 order=PATTERN_ORDER) -> Circuit:
    """Depth ``1 + depth + 1`` grid circuit: H layer, ``depth`` CZ cycles, H layer."""
    if rows < 1 or cols < 1 or depth < 0:
        raise ValueError("need a non-empty grid and non-negative depth")
    n = rows * cols
    rng = random.Random(seed)
    gates = [Gate(GateKind.H, (q,), 0) for q in range(n)]
    last: dict[int, GateKind] = {}
    busy_prev: set[int] = set()
    for t in range(1, depth + 1):
        orient, off = order[(t - 1) % len(order)]
        pairs = grid_couplers(rows, cols, orient, off)
        busy = {q for p in pairs for q in p}
        gates.extend(Gate(GateKind.CZ, p, t) for p in pairs)
        for q in range(n):
            if q in busy_prev and q not in busy:
                if q not in last:
                    kind = GateKind.T
                else:
                    choices = [k for k in (GateKind.XHalf, GateKind.YHalf, GateKind.T) if k != last[q]]
                    kind = rng.choice(choices)
                last[q] = kind
                gates.append(Gate(kind, (q,), t))
        busy_prev = busy
    gates.extend(Gate(GateKind.H, (q,), depth + 1) for q in range(n))
    return Circuit(n, tuple(gates))


_ONE_QUBIT = ("h", "t", "z", "p", "x", "x_1_2", "y_1_2")


def random_circuit(n: int, depth: int, seed: int = 0, two_qubit_rate: float = 0.3,
                   leading_h: bool = False) -> Circuit:
    """``depth`` gates drawn uniformly from the full gate set, one per cycle."""
    rng = random.Random(seed)
    gates = []
    cycle = 0
    if leading_h:
        gates = [Gate(GateKind.H, (q,), 0) for q in range(n)]
        cycle = 1
    for _ in range(depth):
        if n >= 2 and rng.random() < two_qubit_rate:
            a, b = rng.sample(range(n), 2)
            gates.append(Gate(GateKind.from_name(rng.choice(("cz", "cnot"))), (a, b), cycle))
        else:
            name = rng.choice(_ONE_QUBIT)
            gates.append(Gate(GateKind.from_name(name), (rng.randrange(n),), cycle))
        cycle += 1
    return Circuit(n, tuple(gates))


def bundled_circuit(name: str) -> Circuit:
    """Load one of the circuit files shipped with the package (see ``BUNDLED``)."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled circuit {name!r}; have {sorted(BUNDLED)}")
    text = resources.files("stvsim").joinpath("data", BUNDLED[name]).read_text()
    return parse_circuit(text)

"""Turn a circuit into an ordered list of kernel passes.

Planning runs once, before simulation:

1. CNOT, P and Z are lowered to H, CZ and T.
2. Gates are clustered by kind with the reordering scan of
   :func:`cluster_by_reordering`.
3. Runs of diagonal clusters become one :class:`DiagonalPass` (CZ masks plus
   T layers). Runs of non-diagonal clusters are coalesced per qubit, paired,
   and split at ``low_high_boundary``: low-bit ops ride along in the
   preceding diagonal pass, high-bit ops become a recursive transform.

All masks are indexed by amplitude bit position (qubit ``q`` is bit
``n - 1 - q``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    OctantDiagonal,
    ScaledGaussianMatrix,
    gate_matrix,
)
from .kernels.dense import term_code

__all__ = [
    "OPTIMIZATIONS",
    "OneQubitOp",
    "PairedGateOp",
    "TLayer",
    "CZCluster",
    "SuperpositionPass",
    "DiagonalPass",
    "PairedGatePass",
    "RecursiveTransformPass",
    "GenericPass",
    "IdentityPass",
    "SimulationPlan",
    "commutes",
    "cluster_by_reordering",
    "encode_cz_masks",
    "encode_t_layers",
    "pair_one_qubit_gates",
    "coalesce_adjacent",
    "build_plan",
    "dump_plan",
]

OPTIMIZATIONS = ("diag_fusion", "pairing", "recursive_transform", "aligned_lanes", "gray_codes")

@dataclass(frozen=True)
class OneQubitOp:
    """A (possibly coalesced) one-qubit non-diagonal matrix on one amplitude bit."""

    bit: int
    matrix: ScaledGaussianMatrix
    gates: tuple[Gate, ...]

    @property
    def label(self) -> str:
        return "*".join(g.kind.value for g in reversed(self.gates)) or "id"

    @property
    def group(self) -> str:
        kinds = {g.kind for g in self.gates}
        if len(self.gates) == 1 and kinds <= {GateKind.XHalf, GateKind.YHalf}:
            return "xy"
        if len(self.gates) == 1 and kinds == {GateKind.H}:
            return "h"
        return "other"

    def then(self, other: "OneQubitOp") -> "OneQubitOp | None":
        """``other`` applied after ``self``, or None if the product leaves the unit-entry form."""
        prod = other.matrix @ self.matrix
        if not prod.is_representable:
            return None
        return OneQubitOp(self.bit, prod, self.gates + other.gates)


@dataclass(frozen=True)
class PairedGateOp:
    """One or two one-qubit ops applied in a single kernel sweep, high bit first."""

    ops: tuple[OneQubitOp, ...]

    def __post_init__(self):
        ops = tuple(sorted(self.ops, key=lambda o: -o.bit))
        if not 1 <= len(ops) <= 2 or len({o.bit for o in ops}) != len(ops):
            raise ValueError("a paired op holds one or two ops on distinct bits")
        object.__setattr__(self, "ops", ops)

    @property
    def bits(self) -> tuple[int, int]:
        return (self.ops[0].bit, self.ops[1].bit if len(self.ops) > 1 else -1)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.ops)

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(g for o in self.ops for g in o.gates)

    @property
    def matrix(self) -> ScaledGaussianMatrix:
        m = self.ops[0].matrix
        for o in self.ops[1:]:
            m = m.kron(o.matrix)
        return m

    def encode(self):
        """Kernel encoding: ``(hb, lb, codes, rot, rt2_exp, i_exp)``.

        Each factor is written as ``(1+i)**m * R`` with unit entries in ``R``.
        Pairs of ``(1+i)`` become ``2i`` and move into the scale; an odd one
        left over is applied by the kernel as a per-amplitude rotation.
        """
        codes = np.zeros(8, dtype=np.int64)
        m = e = s = 0
        for slot, op in enumerate(self.ops):
            mm, r = op.matrix.reduced()
            m += mm
            e += op.matrix.rt2_exp
            s += op.matrix.i_exp
            for k, z in enumerate(z for row in r.entries for z in row):
                codes[4 * slot + k] = term_code(z)
        q, rot = divmod(m, 2)
        hb, lb = self.bits
        return hb, lb, codes, rot, e - 2 * q, s + q


@dataclass(frozen=True)
class TLayer:
    mask: int


@dataclass(frozen=True)
class CZCluster:
    """``masks[k]`` has bit ``l`` set iff the cluster holds a CZ on bits ``k`` and ``l``."""

    masks: tuple[int, ...]

    @property
    def gate_count(self) -> int:
        return sum(bin(m).count("1") for m in self.masks) // 2

    @property
    def is_empty(self) -> bool:
        return not any(self.masks)


def _encode_ops(ops: Sequence[PairedGateOp]):
    k = len(ops)
    bits = np.zeros((k, 2), dtype=np.int64)
    codes = np.zeros((k, 8), dtype=np.int64)
    rot = np.zeros(k, dtype=np.int64)
    de = ds = 0
    for i, op in enumerate(ops):
        hb, lb, cd, r, e, s = op.encode()
        bits[i] = hb, lb
        codes[i] = cd
        rot[i] = r
        de += e
        ds += s
    return bits, codes, rot, de, ds % 4


@dataclass(frozen=True)
class SuperpositionPass:
    """Leading H on every qubit of |0...0>, done by initialization."""

    gates: tuple[Gate, ...]
    category = "initial H"


@dataclass(frozen=True)
class DiagonalPass:
    cz: CZCluster
    t_layers: tuple[TLayer, ...]
    fused_low_1q: tuple[PairedGateOp, ...] = ()
    gates: tuple[Gate, ...] = ()
    category = "diagonal + low 1q"

    def encoded(self):
        return _encode_ops(self.fused_low_1q)


@dataclass(frozen=True)
class PairedGatePass:
    ops: tuple[PairedGateOp, ...]
    category: str = "paired 1q"

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(g for op in self.ops for g in op.gates)

    def encoded(self):
        return _encode_ops(self.ops)


def _mask_of(ops, label) -> int:
    m = 0
    for op in ops:
        for o in op.ops:
            if o.label == label:
                m |= 1 << o.bit
    return m


@dataclass(frozen=True)
class RecursiveTransformPass:
    """One layer of one-qubit ops, applied by the cache-blocked recursive transform."""

    ops: tuple[PairedGateOp, ...]
    category: str = "high 1q"

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(sorted(self.ops, key=lambda o: -o.bits[0])))

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(g for op in self.ops for g in op.gates)

    @property
    def x_mask(self) -> int:
        return _mask_of(self.ops, GateKind.XHalf.value)

    @property
    def y_mask(self) -> int:
        return _mask_of(self.ops, GateKind.YHalf.value)

    @property
    def h_mask(self) -> int:
        return _mask_of(self.ops, GateKind.H.value)

    def encoded(self):
        return _encode_ops(self.ops)


@dataclass(frozen=True)
class GenericPass:
    gate: Gate
    matrix: ScaledGaussianMatrix | OctantDiagonal
    category = "generic"

    @property
    def gates(self) -> tuple[Gate, ...]:
        return (self.gate,)


@dataclass(frozen=True)
class IdentityPass:
    """Gates whose coalesced product was the identity; executing it is a no-op."""

    gates: tuple[Gate, ...]
    category = "cancelled"


@dataclass(frozen=True)
class SimulationPlan:
    num_qubits: int
    passes: tuple
    low_high_boundary: int
    disabled: frozenset = field(default_factory=frozenset)

    @property
    def gates(self) -> list[Gate]:
        return [g for p in self.passes for g in p.gates]

    @property
    def starts_in_superposition(self) -> bool:
        return bool(self.passes) and isinstance(self.passes[0], SuperpositionPass)


# commutation and clustering


def commutes(a: Gate, b: Gate) -> bool:
    """True iff ``a`` and ``b`` act on disjoint qubits or are both diagonal."""
    if not set(a.qubits) & set(b.qubits):
        return True
    return a.kind.is_diagonal and b.kind.is_diagonal


def cluster_by_reordering(c: Circuit) -> list[list[Gate]]:
    """Group gates of a kind by moving them forward past gates they commute with.

    For each gate not yet clustered (the seed), scan forward with every qubit
    unobstructed. A gate of the seed's kind whose qubits are all unobstructed
    joins the cluster; otherwise its qubits become obstructed. A
    non-diagonal gate on a qubit the cluster already holds also obstructs,
    so such clusters stay single layers. A gate of another kind obstructs
    its qubits unless it and the seed are both diagonal. The scan stops once
    every qubit is obstructed.
    """
    gates = list(c.gates)
    taken = [False] * len(gates)
    clusters = []
    for k, seed in enumerate(gates):
        if taken[k]:
            continue
        taken[k] = True
        cluster = [seed]
        pairs = {seed.qubits} if seed.kind is GateKind.CZ else set()
        held = set(seed.qubits)
        blocked: set[int] = set()
        for j in range(k + 1, len(gates)):
            if len(blocked) >= c.num_qubits:
                break
            if taken[j]:
                continue
            g = gates[j]
            if g.kind is seed.kind:
                repeat = not g.kind.is_diagonal and not held.isdisjoint(g.qubits)
                if blocked.isdisjoint(g.qubits) and not repeat and not (
                    g.kind is GateKind.CZ and g.qubits in pairs
                ):
                    taken[j] = True
                    cluster.append(g)
                    held.update(g.qubits)
                    if g.kind is GateKind.CZ:
                        pairs.add(g.qubits)
                else:
                    blocked.update(g.qubits)
            elif not (g.kind.is_diagonal and seed.kind.is_diagonal):
                blocked.update(g.qubits)
        clusters.append(cluster)
    return clusters


# bitmask encodings


def encode_cz_masks(cz_gates: Iterable[Gate], num_qubits: int) -> CZCluster:
    """Per-bit CZ masks; a pair may appear at most once."""
    masks = [0] * num_qubits
    for g in cz_gates:
        if g.kind is not GateKind.CZ:
            raise ValueError(f"not a CZ gate: {g}")
        a, b = (num_qubits - 1 - q for q in g.qubits)
        if masks[a] >> b & 1:
            raise ValueError(f"duplicate CZ on qubits {g.qubits} in one cluster")
        masks[a] |= 1 << b
        masks[b] |= 1 << a
    return CZCluster(tuple(masks))


def encode_t_layers(t_gates: Iterable[Gate], num_qubits: int) -> list[TLayer]:
    """Greedy first-fit: each T goes to the first layer without a T on its qubit."""
    layers: list[int] = []
    for g in t_gates:
        if g.kind is not GateKind.T:
            raise ValueError(f"not a T gate: {g}")
        bit = 1 << (num_qubits - 1 - g.qubits[0])
        for i, m in enumerate(layers):
            if not m & bit:
                layers[i] = m | bit
                break
        else:
            layers.append(bit)
    return [TLayer(m) for m in layers]


# one-qubit op pairing and coalescing


def pair_one_qubit_gates(
    layer: Sequence[OneQubitOp], pairing: bool = True
) -> tuple[list[PairedGateOp], list[PairedGateOp]]:
    """Pair ops of one layer: by group (X½/Y½ blended, H, other), in ascending bit order.

    An odd op out is the most significant of its group and is returned as a
    single. With ``pairing`` off every op is a single.
    """
    if not pairing:
        return [], [PairedGateOp((o,)) for o in sorted(layer, key=lambda o: o.bit)]
    pairs, singles = [], []
    for group in ("xy", "h", "other"):
        members = sorted((o for o in layer if o.group == group), key=lambda o: o.bit)
        for i in range(0, len(members) - 1, 2):
            pairs.append(PairedGateOp((members[i], members[i + 1])))
        if len(members) % 2:
            singles.append(PairedGateOp((members[-1],)))
    return pairs, singles


def coalesce_adjacent(p1: PairedGateOp, p2: PairedGateOp) -> PairedGateOp | None:
    """``p2`` after ``p1`` as one op when both act on the same bits and the product stays unit-entry.

    Returns None otherwise. A product equal to the identity comes back as an
    op whose factors are all identity; callers drop it (see :func:`is_identity_op`).
    """
    if [o.bit for o in p1.ops] != [o.bit for o in p2.ops]:
        return None
    merged = []
    for a, b in zip(p1.ops, p2.ops):
        m = a.then(b)
        if m is None:
            return None
        merged.append(m)
    return PairedGateOp(tuple(merged))


def is_identity_op(op: PairedGateOp | OneQubitOp) -> bool:
    ops = op.ops if isinstance(op, PairedGateOp) else (op,)
    return all(o.matrix.is_identity for o in ops)


def _coalesce_segment(
    gates: Sequence[Gate], n: int
) -> tuple[list[list[OneQubitOp]], list[OneQubitOp]]:
    """Per-qubit runs of non-diagonal one-qubit gates, merged where the product allows.

    Returns layers: layer ``i`` holds the ``i``-th surviving op of every qubit.
    """
    per_qubit: dict[int, list[OneQubitOp]] = {}
    for g in gates:
        op = OneQubitOp(n - 1 - g.qubits[0], gate_matrix(g.kind), (g,))
        seq = per_qubit.setdefault(g.qubits[0], [])
        merged = seq[-1].then(op) if seq else None
        if merged is None:
            seq.append(op)
        else:
            seq[-1] = merged
    layers: list[list[OneQubitOp]] = []
    identities: list[OneQubitOp] = []
    for q in sorted(per_qubit):
        kept = []
        for op in per_qubit[q]:
            (identities if op.matrix.is_identity else kept).append(op)
        for i, op in enumerate(kept):
            if i == len(layers):
                layers.append([])
            layers[i].append(op)
    return layers, identities


# plan construction


def _diagonal_passes(gates: Sequence[Gate], n: int, fuse: bool) -> list[DiagonalPass]:
    if not fuse:
        out = []
        for g in gates:
            if g.kind is GateKind.CZ:
                out.append(DiagonalPass(encode_cz_masks([g], n), (), (), (g,)))
            else:
                out.append(DiagonalPass(CZCluster((0,) * n), tuple(encode_t_layers([g], n)), (), (g,)))
        return out
    # duplicate CZ pairs go to later passes, first fit
    cz_groups: list[list[Gate]] = []
    seen: list[set] = []
    for g in gates:
        if g.kind is not GateKind.CZ:
            continue
        for grp, pairs in zip(cz_groups, seen):
            if g.qubits not in pairs:
                grp.append(g)
                pairs.add(g.qubits)
                break
        else:
            cz_groups.append([g])
            seen.append({g.qubits})
    t_gates = [g for g in gates if g.kind is GateKind.T]
    out = []
    for i in range(max(1, len(cz_groups))):
        cz = cz_groups[i] if i < len(cz_groups) else []
        t = t_gates if i == 0 else []
        out.append(
            DiagonalPass(
                encode_cz_masks(cz, n),
                tuple(encode_t_layers(t, n)),
                (),
                tuple(cz) + tuple(t),
            )
        )
    return out


def _is_full_h_layer(cluster: Sequence[Gate], n: int) -> bool:
    return (
        len(cluster) == n
        and all(g.kind is GateKind.H for g in cluster)
        and {g.qubits[0] for g in cluster} == set(range(n))
    )


def build_plan(
    c: Circuit, boundary: int | None = None, disabled: Iterable[str] = ()
) -> SimulationPlan:
    """Plan ``c``. ``boundary`` defaults to ceil(n/2); ``disabled`` names optimizations to skip."""
    disabled = frozenset(disabled)
    unknown = disabled - set(OPTIMIZATIONS)
    if unknown:
        raise ValueError(f"unknown optimizations: {sorted(unknown)}")
    n = c.num_qubits
    if boundary is None:
        boundary = math.ceil(n / 2)
    if not 0 <= boundary <= n:
        raise ValueError(f"boundary must lie in [0, {n}]")
    low = c.lowered()

    if {"diag_fusion", "pairing", "recursive_transform"} <= disabled:
        passes = [GenericPass(g, gate_matrix(g.kind)) for g in low.gates]
        return SimulationPlan(n, tuple(passes), boundary, disabled)

    fuse = "diag_fusion" not in disabled
    pairing = "pairing" not in disabled
    use_rt = "recursive_transform" not in disabled

    clusters = cluster_by_reordering(low)
    passes: list = []
    if clusters and _is_full_h_layer(clusters[0], n):
        passes.append(SuperpositionPass(tuple(clusters[0])))
        clusters = clusters[1:]

    # consecutive clusters of the same diagonality form one segment
    segments: list[tuple[bool, list[Gate]]] = []
    for cl in clusters:
        diag = cl[0].kind.is_diagonal
        if segments and segments[-1][0] == diag:
            segments[-1][1].extend(cl)
        else:
            segments.append((diag, list(cl)))

    dropped: list[Gate] = []
    for diag, gates in segments:
        if diag:
            passes.extend(_diagonal_passes(gates, n, fuse))
            continue
        layers, identities = _coalesce_segment(gates, n)
        dropped.extend(g for op in identities for g in op.gates)
        low_ops: list[PairedGateOp] = []
        high_layers: list[list[PairedGateOp]] = []
        for layer in layers:
            lo = [o for o in layer if o.bit < boundary]
            hi = [o for o in layer if o.bit >= boundary]
            pairs, singles = pair_one_qubit_gates(lo, pairing)
            low_ops.extend(pairs + singles)
            if hi:
                pairs, singles = pair_one_qubit_gates(hi, pairing)
                high_layers.append(pairs + singles)
        if low_ops:
            prev = passes[-1] if passes else None
            if fuse and isinstance(prev, DiagonalPass) and not prev.fused_low_1q:
                fused_gates = tuple(g for op in low_ops for g in op.gates)
                passes[-1] = DiagonalPass(
                    prev.cz, prev.t_layers, tuple(low_ops), prev.gates + fused_gates
                )
            else:
                passes.append(_paired_pass(low_ops))
        for ops in high_layers:
            if use_rt:
                passes.append(RecursiveTransformPass(tuple(ops)))
            else:
                passes.append(_paired_pass(ops))

    passes = _label_final_h(passes)
    if dropped:
        # gates that cancelled to the identity still count as consumed
        passes.append(IdentityPass(tuple(dropped)))
    return SimulationPlan(n, tuple(passes), boundary, disabled)


def _paired_pass(ops: Sequence[PairedGateOp]) -> PairedGatePass:
    category = "single 1q" if all(len(o.ops) == 1 for o in ops) else "paired 1q"
    return PairedGatePass(tuple(ops), category)


def _label_final_h(passes: list) -> list:
    """The trailing run of H-only non-diagonal passes is reported as the final H layer."""
    out = list(passes)
    for i in range(len(out) - 1, -1, -1):
        p = out[i]
        if not isinstance(p, (PairedGatePass, RecursiveTransformPass)):
            break
        if not all(g.kind is GateKind.H for g in p.gates):
            break
        out[i] = type(p)(p.ops, "final H")
    return out


def _bin(mask: int, n: int) -> str:
    return format(mask, f"0{n}b") if n else ""


def dump_plan(plan: SimulationPlan) -> str:
    """Stable text listing of the plan; masks are printed MSB (bit n-1) first."""
    n = plan.num_qubits
    lines = [f"plan n={n} boundary={plan.low_high_boundary} passes={len(plan.passes)}"]
    for i, p in enumerate(plan.passes):
        head = f"[{i}] {type(p).__name__} ({p.category}, {len(p.gates)} gates)"
        lines.append(head)
        if isinstance(p, DiagonalPass):
            for k, m in enumerate(p.cz.masks):
                if m:
                    lines.append(f"    cz bit {k}: {_bin(m, n)}")
            for t in p.t_layers:
                lines.append(f"    t layer: {_bin(t.mask, n)}")
            for op in p.fused_low_1q:
                lines.append(f"    low op bits {op.bits}: {' x '.join(op.kinds)}")
        elif isinstance(p, (PairedGatePass, RecursiveTransformPass)):
            if isinstance(p, RecursiveTransformPass) and (p.x_mask | p.y_mask | p.h_mask):
                lines.append(
                    f"    x: {_bin(p.x_mask, n)} y: {_bin(p.y_mask, n)} h: {_bin(p.h_mask, n)}"
                )
            for op in p.ops:
                lines.append(f"    op bits {op.bits}: {' x '.join(op.kinds)}")
        elif isinstance(p, GenericPass):
            lines.append(f"    {p.gate}")
    return "\n".join(lines) + "\n"

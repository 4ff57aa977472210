"""Plan execution with a static worker pool, per-pass profiling and ablation switches.

Every pass is a barrier. Inside a pass each worker gets a fixed, disjoint
share of the state, and every amplitude sees the same arithmetic in the same
order whatever the worker count, so results are bit-identical for any
``workers``.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .circuit import Circuit
from .kernels import dense
from .kernels.diagonal import apply_diagonal_range, prepare_diagonal
from .planner import (
    OPTIMIZATIONS,
    DiagonalPass,
    GenericPass,
    IdentityPass,
    PairedGatePass,
    RecursiveTransformPass,
    SimulationPlan,
    SuperpositionPass,
    build_plan,
)
from .state import StateVector, flush_scale, init_basis, init_superposition

__all__ = [
    "ExecConfig",
    "PassProfile",
    "NumericalError",
    "AblationMismatch",
    "run",
    "simulate",
    "profile_table",
    "format_profile",
    "ablation_report",
    "format_ablation",
    "ABLATION_PRESETS",
    "warmup",
]


class NumericalError(RuntimeError):
    pass


class AblationMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class ExecConfig:
    workers: int = 1
    flush_threshold: int = 101
    disabled_opts: frozenset = field(default_factory=frozenset)
    boundary: int | None = None
    sweep_bits: int = dense.SWEEP_BITS
    check_finite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "disabled_opts", frozenset(self.disabled_opts))
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        unknown = self.disabled_opts - set(OPTIMIZATIONS)
        if unknown:
            raise ValueError(f"unknown optimizations: {sorted(unknown)}")

    def enabled(self, opt: str) -> bool:
        return opt not in self.disabled_opts


@dataclass(frozen=True)
class PassProfile:
    category: str
    gates: int
    seconds: float


class _Pool:
    def __init__(self, workers: int):
        self.workers = workers
        self._ex = ThreadPoolExecutor(workers) if workers > 1 else None

    def each(self, fn: Callable[[int, int], None]) -> None:
        """Call ``fn(part, nparts)`` for every share and wait for all of them."""
        if self._ex is None:
            fn(0, 1)
            return
        for f in [self._ex.submit(fn, p, self.workers) for p in range(self.workers)]:
            f.result()

    def close(self) -> None:
        if self._ex is not None:
            self._ex.shutdown()


def _run_diagonal(sv, p: DiagonalPass, pool: _Pool, cfg: ExecConfig) -> None:
    payload = prepare_diagonal(p, sv.n)
    gray = cfg.enabled("gray_codes")
    lanes = cfg.enabled("aligned_lanes")

    def work(part, nparts):
        b0, b1 = dense._share(payload.num_blocks, part, nparts)
        apply_diagonal_range(sv.view, payload, b0, b1, gray, lanes)

    pool.each(work)
    sv.scale.add(payload.rt2_exp, payload.i_exp)


def _run_ops(sv, bits, codes, rot, pool: _Pool, lanes: bool) -> None:
    v = sv.view
    if pool.workers == 1:
        dense.apply_ops_region(v, 0, sv.n, bits, codes, rot, lanes, 0, bits.shape[0])
        return
    for k in range(bits.shape[0]):
        pool.each(
            lambda part, nparts, k=k: dense.apply_op_region(
                v, 0, sv.n, bits[k, 0], bits[k, 1], codes[k], rot[k], lanes, part, nparts
            )
        )


def _run_rt(sv, bits, codes, rot, pool: _Pool, cfg: ExecConfig) -> None:
    v = sv.view
    lanes = cfg.enabled("aligned_lanes")
    nops = bits.shape[0]
    if pool.workers == 1:
        dense.recursive_transform(v, 0, sv.n, bits, codes, rot, 0, cfg.sweep_bits, lanes)
        return
    level = 0
    while level < nops:
        cb = int(bits[level, 0]) + 1
        nchunks = 1 << (sv.n - cb)
        if nchunks >= pool.workers and sv.n > cfg.sweep_bits:
            # each worker owns a fixed run of chunk subtrees
            def work(part, nparts, cb=cb, level=level, nchunks=nchunks):
                c0, c1 = dense._share(nchunks, part, nparts)
                for c in range(c0, c1):
                    dense.recursive_transform(
                        v, c << cb, cb, bits, codes, rot, level, cfg.sweep_bits, lanes
                    )

            pool.each(work)
            return
        # too few chunks to go around: partition the op itself
        pool.each(
            lambda part, nparts, k=level: dense.apply_op_region(
                v, 0, sv.n, bits[k, 0], bits[k, 1], codes[k], rot[k], lanes, part, nparts
            )
        )
        level += 1


def _run_generic(sv, p: GenericPass, pool: _Pool) -> None:
    n = sv.n
    bits = [n - 1 - q for q in p.gate.qubits]
    kernel = dense.apply_1q_generic if len(bits) == 1 else dense.apply_2q_generic
    target = bits[0] if len(bits) == 1 else tuple(bits)
    pool.each(lambda part, nparts: kernel(sv, target, p.matrix, part, nparts, False))
    e = getattr(p.matrix, "rt2_exp", 0)
    s = getattr(p.matrix, "i_exp", 0)
    sv.scale.add(e, s)


def _execute_pass(sv, p, pool: _Pool, cfg: ExecConfig) -> None:
    if isinstance(p, DiagonalPass):
        _run_diagonal(sv, p, pool, cfg)
    elif isinstance(p, PairedGatePass):
        bits, codes, rot, e, s = p.encoded()
        _run_ops(sv, bits, codes, rot, pool, cfg.enabled("aligned_lanes"))
        sv.scale.add(e, s)
    elif isinstance(p, RecursiveTransformPass):
        bits, codes, rot, e, s = p.encoded()
        _run_rt(sv, bits, codes, rot, pool, cfg)
        sv.scale.add(e, s)
    elif isinstance(p, GenericPass):
        _run_generic(sv, p, pool)
    elif isinstance(p, (SuperpositionPass, IdentityPass)):
        pass
    else:
        raise TypeError(f"unknown pass {type(p).__name__}")


def run(
    plan: SimulationPlan | Circuit, config: ExecConfig | None = None
) -> tuple[StateVector, list[PassProfile]]:
    """Execute ``plan`` (a circuit is planned first with the config's switches).

    Returns the final state and one profile entry per pass, plus a
    ``rescaling`` entry for every scale flush.
    """
    cfg = config or ExecConfig()
    if isinstance(plan, Circuit):
        plan = build_plan(plan, cfg.boundary, cfg.disabled_opts)
    profiles: list[PassProfile] = []
    t0 = time.perf_counter()
    if plan.starts_in_superposition:
        sv = init_superposition(plan.num_qubits)
    else:
        sv = init_basis(plan.num_qubits)
    init_seconds = time.perf_counter() - t0

    pool = _Pool(cfg.workers)
    try:
        for i, p in enumerate(plan.passes):
            t0 = time.perf_counter()
            _execute_pass(sv, p, pool, cfg)
            dt = time.perf_counter() - t0
            if isinstance(p, SuperpositionPass):
                dt += init_seconds
            profiles.append(PassProfile(p.category, len(p.gates), dt))
            t0 = time.perf_counter()
            if flush_scale(sv, cfg.flush_threshold):
                profiles.append(PassProfile("rescaling", 0, time.perf_counter() - t0))
            if cfg.check_finite and not np.isfinite(sv.view).all():
                raise NumericalError(f"non-finite amplitude after pass {i} ({p.category})")
    finally:
        pool.close()
    return sv, profiles


def simulate(c: Circuit, config: ExecConfig | None = None) -> StateVector:
    return run(c, config)[0]


def profile_table(profiles: Iterable[PassProfile]) -> list[tuple[str, int, float, float]]:
    """Rows ``(category, gates, percent, seconds)`` in first-seen category order."""
    agg: dict[str, list] = {}
    for pr in profiles:
        row = agg.setdefault(pr.category, [0, 0.0])
        row[0] += pr.gates
        row[1] += pr.seconds
    total = sum(r[1] for r in agg.values()) or 1.0
    return [(cat, g, 100.0 * s / total, s) for cat, (g, s) in agg.items()]


def format_profile(profiles: Iterable[PassProfile]) -> str:
    rows = profile_table(profiles)
    lines = [f"{'category':<20} {'gates':>7} {'% time':>8} {'seconds':>10}"]
    for cat, g, pct, s in rows:
        lines.append(f"{cat:<20} {g:>7d} {pct:>7.1f}% {s:>10.4f}")
    lines.append(
        f"{'total':<20} {sum(r[1] for r in rows):>7d} {100.0:>7.1f}% {sum(r[3] for r in rows):>10.4f}"
    )
    return "\n".join(lines) + "\n"


ABLATION_PRESETS: dict[str, frozenset] = {
    "all_on": frozenset(),
    "no_aligned_lanes": frozenset({"aligned_lanes"}),
    "no_gray_codes": frozenset({"gray_codes"}),
    "no_pairing": frozenset({"pairing"}),
    "no_recursive_transform": frozenset({"recursive_transform"}),
    "no_diag_fusion": frozenset({"diag_fusion"}),
    "all_off": frozenset(OPTIMIZATIONS),
}


_WARM = False


def warmup() -> None:
    """Load every compiled kernel once so later timings exclude JIT and cache loading."""
    global _WARM
    if _WARM:
        return
    from .benchmarks import grid_circuit, random_circuit

    for c in (grid_circuit(2, 3, 8, seed=0), random_circuit(6, 40, seed=0)):
        for workers in (1, 2):
            for off in ABLATION_PRESETS.values():
                run(c, ExecConfig(workers=workers, disabled_opts=off, sweep_bits=2))
    _WARM = True


def ablation_report(
    c: Circuit,
    configs: Mapping[str, Iterable[str]] | None = None,
    workers: int = 1,
    tol: float = 1e-5,
    repeats: int = 1,
) -> list[tuple[str, float, float]]:
    """Run ``c`` once per configuration; rows ``(name, seconds, max |diff| vs first)``.

    ``configs`` maps a row name to the optimizations it turns off. The first
    configuration is the reference; any row that disagrees with it by more
    than ``tol`` on some amplitude raises :class:`AblationMismatch`. With
    ``repeats > 1`` the fastest run is reported.
    """
    if configs is None:
        configs = ABLATION_PRESETS
    warmup()
    rows = []
    ref = None
    for name, off in configs.items():
        best = float("inf")
        for _ in range(max(1, repeats)):
            cfg = ExecConfig(workers=workers, disabled_opts=frozenset(off))
            t0 = time.perf_counter()
            sv, _ = run(c, cfg)
            best = min(best, time.perf_counter() - t0)
        amps = sv.amplitudes()
        del sv
        if ref is None:
            ref = amps
            diff = 0.0
        else:
            diff = float(np.max(np.abs(amps - ref)))
            if not diff <= tol:
                raise AblationMismatch(f"configuration {name!r} differs by {diff:.3g} > {tol}")
        del amps
        rows.append((name, best, diff))
    return rows


def format_ablation(rows) -> str:
    base = rows[0][1] if rows else 1.0
    lines = [f"{'configuration':<24} {'seconds':>10} {'vs first':>9} {'max |diff|':>11}"]
    for name, s, d in rows:
        lines.append(f"{name:<24} {s:>10.4f} {s / base:>8.2f}x {d:>11.3g}")
    return "\n".join(lines) + "\n"

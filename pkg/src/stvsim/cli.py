"""Command-line front end.

Results go to stdout and timings to stderr, so stdout of a seeded run can be
diffed. The ``profile`` and ``ablate`` tables are the result of those
commands and are printed to stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .circuit import CircuitFormatError, read_circuit, serialize_circuit
from .exec import (
    AblationMismatch,
    ExecConfig,
    ABLATION_PRESETS,
    ablation_report,
    format_ablation,
    format_profile,
    run,
    warmup,
)
from .planner import OPTIMIZATIONS, build_plan, dump_plan
from .state import dump, norm, sample_measurement

__all__ = ["main", "build_parser"]


def _off_list(text: str) -> frozenset:
    names = {t.strip() for t in text.split(",") if t.strip()}
    if "all" in names:
        return frozenset(OPTIMIZATIONS)
    if "none" in names:
        return frozenset()
    unknown = names - set(OPTIMIZATIONS)
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown optimization(s) {sorted(unknown)}; choose from {', '.join(OPTIMIZATIONS)}, all"
        )
    return frozenset(names)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _amplitudes(text: str):
    if text == "all":
        return "all"
    try:
        return [int(t, 0) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'all' or a comma-separated index list") from None


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("STV_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stvsim", description="State-vector circuit simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--circuit", required=True, help="circuit file")
    common.add_argument("--threads", type=_positive, default=_default_threads(),
                        help="worker threads (default: $STV_THREADS or 1)")
    common.add_argument("--flush-threshold", type=_positive, default=101)
    common.add_argument("--boundary", type=int, default=None,
                        help="bit position splitting low and high qubits")
    common.add_argument("--off", type=_off_list, default=frozenset(),
                        help=f"optimizations to disable: {','.join(OPTIMIZATIONS)} or all")

    p = sub.add_parser("run", parents=[common], help="simulate and print norm and amplitudes")
    p.add_argument("--amplitudes", type=_amplitudes, default=[], help="'all' or indices, e.g. 0,5")

    p = sub.add_parser("sample", parents=[common], help="simulate and sample measurements")
    p.add_argument("--shots", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    sub.add_parser("profile", parents=[common], help="per-category runtime table")

    p = sub.add_parser("ablate", help="runtime with optimizations turned off")
    p.add_argument("--circuit", required=True)
    p.add_argument("--threads", type=_positive, default=_default_threads())
    p.add_argument("--off", type=_off_list, action="append",
                   help="one row per use; default is one row per optimization plus all")
    p.add_argument("--repeats", type=_positive, default=1)

    p = sub.add_parser("verify", parents=[common], help="compare against the reference simulator")
    p.add_argument("--tol", type=float, default=1e-5)

    sub.add_parser("plan", parents=[common], help="print the simulation plan")

    p = sub.add_parser("generate", help="write a random grid circuit")
    p.add_argument("--rows", type=_positive, required=True)
    p.add_argument("--cols", type=_positive, required=True)
    p.add_argument("--depth", type=int, default=26)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config(args) -> ExecConfig:
    return ExecConfig(
        workers=args.threads,
        flush_threshold=args.flush_threshold,
        disabled_opts=args.off,
        boundary=args.boundary,
    )


def _timed_run(args):
    c = read_circuit(args.circuit)
    cfg = _config(args)
    warmup()
    t0 = time.perf_counter()
    sv, profiles = run(c, cfg)
    print(f"simulated {c.num_qubits} qubits in {time.perf_counter() - t0:.4f} s", file=sys.stderr)
    return c, sv, profiles


def _cmd_run(args, out) -> int:
    _, sv, _ = _timed_run(args)
    out.write(dump(sv, args.amplitudes))
    out.write(f"norm {norm(sv):.9g}\n")
    return 0


def _cmd_sample(args, out) -> int:
    _, sv, _ = _timed_run(args)
    for s in sample_measurement(sv, args.seed, args.shots):
        out.write(s + "\n")
    return 0


def _cmd_profile(args, out) -> int:
    c, _, profiles = _timed_run(args)
    counts = c.lowered().counts()
    out.write(f"# {c.num_qubits} qubits, {counts['all']} gates after rewrites\n")
    out.write(format_profile(profiles))
    return 0


def _cmd_ablate(args, out) -> int:
    c = read_circuit(args.circuit)
    if args.off:
        configs = {"all_on": frozenset()}
        for off in args.off:
            if off == frozenset(OPTIMIZATIONS):
                name = "all_off"
            else:
                name = "no_" + "+".join(sorted(off)) if off else "all_on"
            configs[name] = off
    else:
        configs = ABLATION_PRESETS
    rows = ablation_report(c, configs, workers=args.threads, repeats=args.repeats)
    out.write(format_ablation(rows))
    return 0


def _cmd_verify(args, out) -> int:
    from .oracle import ORACLE_MAX_QUBITS, compare_states, oracle_run

    c = read_circuit(args.circuit)
    if c.num_qubits > ORACLE_MAX_QUBITS:
        raise ValueError(f"verify is limited to {ORACLE_MAX_QUBITS} qubits")
    sv, _ = run(c, _config(args))
    worst, j, ok = compare_states(sv, oracle_run(c), args.tol)
    out.write(f"{'PASS' if ok else 'FAIL'} max|diff|={worst:.3g} at {j:0{c.num_qubits}b}\n")
    return 0 if ok else 1


def _cmd_plan(args, out) -> int:
    c = read_circuit(args.circuit)
    out.write(dump_plan(build_plan(c, args.boundary, args.off)))
    return 0


def _cmd_generate(args, out) -> int:
    from .benchmarks import grid_circuit

    out.write(serialize_circuit(grid_circuit(args.rows, args.cols, args.depth, args.seed)))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sample": _cmd_sample,
    "profile": _cmd_profile,
    "ablate": _cmd_ablate,
    "verify": _cmd_verify,
    "plan": _cmd_plan,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except (CircuitFormatError, OSError, ValueError, IndexError, AblationMismatch) as exc:
        print(f"stvsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""
Grid benchmark: where the time goes
===================================

Run a bundled random grid circuit (H layer, 26 CZ cycles, H layer), print
the per-category profile, then turn optimizations off one at a time.

    python3 demos/03_grid_benchmark.py            # 20 qubits
    python3 demos/03_grid_benchmark.py 4x6 2      # 24 qubits, 2 threads
"""

import sys

from stvsim.benchmarks import bundled_circuit
from stvsim.exec import ExecConfig, ablation_report, format_ablation, format_profile, run, warmup
from stvsim.state import norm

size = sys.argv[1] if len(sys.argv) > 1 else "4x5"
workers = int(sys.argv[2]) if len(sys.argv) > 2 else 1
c = bundled_circuit(f"grid_{size}_d26")
counts = c.counts()
print(f"{c.num_qubits} qubits: {counts['all']} gates, {counts['2q']} CZ, {counts['t']} T")

# compiled kernels load on first use; keep that out of the timings
warmup()
sv, profiles = run(c, ExecConfig(workers=workers))
print(f"norm {norm(sv):.7f}\n")
print(format_profile(profiles))

# Every row must agree with the first to 1e-5 or the report raises.
print(format_ablation(ablation_report(c, workers=workers)))

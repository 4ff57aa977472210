import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stvsim.circuit import Circuit, Gate, GateKind
from stvsim.exec import ExecConfig, run, warmup

settings.register_profile(
    "stvsim", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("stvsim")


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    warmup()


def engine_amplitudes(c: Circuit, **config) -> np.ndarray:
    sv, _ = run(c, ExecConfig(**config))
    return sv.amplitudes()


def random_state(n: int, rng) -> np.ndarray:
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    # round through complex64 so engine and reference start from the same numbers
    return psi.astype(np.complex64).astype(np.complex128)


def figure_circuit() -> Circuit:
    """Four-qubit example used throughout: H layer, CZ/T, X½/Y½ mix, H layer."""
    H, T, X, Y, CZ = GateKind.H, GateKind.T, GateKind.XHalf, GateKind.YHalf, GateKind.CZ
    gates = [Gate(H, (q,), 0) for q in range(4)]
    gates += [Gate(CZ, (0, 1), 1), Gate(T, (2,), 1)]
    gates += [Gate(T, (0,), 2), Gate(CZ, (2, 3), 2)]
    gates += [Gate(X, (0,), 3), Gate(T, (1,), 3), Gate(X, (2,), 3), Gate(T, (3,), 3)]
    gates += [Gate(X, (1,), 4), Gate(Y, (2,), 4)]
    gates += [Gate(Y, (1,), 5), Gate(Y, (3,), 5)]
    gates += [Gate(H, (q,), 6) for q in range(4)]
    return Circuit(4, gates)


ACCEPTANCE: list[str] = []


def record(name: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

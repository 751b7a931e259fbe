from functools import reduce

import numpy as np
import pytest

from symbreak_vqe.pauli import PauliString, PauliSum

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(op) -> np.ndarray:
    """Independent dense oracle: site 0 is the least significant bit."""
    if isinstance(op, PauliString):
        # np.kron(A, B): A acts on the high bit
        return reduce(np.kron, [_MATS[op.axis_at(s) or "I"] for s in reversed(range(op.n_qubits))])
    mat = np.zeros((2**op.n_qubits,) * 2, dtype=complex)
    for c, s in op.terms:
        mat += c * dense(s)
    return mat


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def random_string(n: int, rng: np.random.Generator) -> PauliString:
    axes = rng.choice(list("IXYZ"), size=n)
    return PauliString(n, tuple((i, a) for i, a in enumerate(axes) if a != "I"))


def random_sum(n: int, rng: np.random.Generator, terms: int = 6) -> PauliSum:
    return PauliSum(n, [(float(rng.normal()), random_string(n, rng)) for _ in range(terms)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

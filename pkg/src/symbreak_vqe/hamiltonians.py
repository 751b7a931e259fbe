"""Spin-chain Hamiltonians and their parity symmetries.

Sites are 0-based internally. Sums written 1-based (sites 1..N) map to
internal site ``i - 1``. In particular the sublattice parities are

* ``P1`` = X on 1-based even sites 2, 4, ..., N  -> internal odd sites 1, 3, ...
* ``P2`` = X on 1-based odd sites 1, 3, ..., N-1 -> internal even sites 0, 2, ...
"""

from __future__ import annotations

from dataclasses import dataclass

from .pauli import PauliString, PauliSum

MODELS = ("tfi", "tfc", "cluster")


@dataclass(frozen=True)
class ModelSpec:
    """Model selection: ``tfi`` and ``tfc`` are periodic, ``cluster`` is open."""

    model: str
    n_qubits: int
    h: float = 0.5

    def __post_init__(self):
        model = self.model.lower()
        if model == "cluster_open":
            model = "cluster"
        if model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        object.__setattr__(self, "model", model)
        n = self.n_qubits
        if model == "tfi" and n < 2:
            raise ValueError("tfi needs n >= 2")
        if model == "tfc" and (n < 3 or n % 2):
            raise ValueError("tfc needs even n >= 4")
        if model == "cluster" and n < 3:
            raise ValueError("cluster needs n >= 3")

    @property
    def boundary(self) -> str:
        return "open" if self.model == "cluster" else "periodic"

    def hamiltonian(self) -> PauliSum:
        if self.model == "tfi":
            return build_tfi(self.n_qubits, self.h)
        if self.model == "tfc":
            return build_tfc(self.n_qubits, self.h)
        return build_cluster_open(self.n_qubits)

    def parities(self) -> list[PauliString]:
        return parity_ops(self)


def x_field(n: int, h: float) -> list[tuple[float, PauliString]]:
    return [(-h, PauliString.on(n, "X", [i])) for i in range(n)]


def build_tfi(n: int, h: float) -> PauliSum:
    """``-sum Z_i Z_{i+1} - h sum X_i`` on a ring (n=2 merges the double bond)."""
    if n < 2:
        raise ValueError("tfi needs n >= 2")
    bonds = [(-1.0, PauliString.on(n, "ZZ", [i, i + 1])) for i in range(n)]
    return PauliSum(n, bonds + x_field(n, h))


def zxz_terms(n: int, periodic: bool) -> list[PauliString]:
    count = n if periodic else n - 2
    return [PauliString.on(n, "ZXZ", [i, i + 1, i + 2]) for i in range(count)]


def build_tfc(n: int, h: float) -> PauliSum:
    """``-sum Z_i X_{i+1} Z_{i+2} - h sum X_i`` on a ring of even length."""
    if n < 3 or n % 2:
        raise ValueError(f"tfc needs even n >= 4, got {n}")
    return PauliSum(n, [(-1.0, s) for s in zxz_terms(n, True)] + x_field(n, h))


def build_cluster_open(n: int) -> PauliSum:
    """Open-boundary cluster Hamiltonian with N-2 stabilizer terms."""
    if n < 3:
        raise ValueError(f"cluster needs n >= 3, got {n}")
    return PauliSum(n, [(-1.0, s) for s in zxz_terms(n, False)])


def sublattice_parity(n: int, start: int) -> PauliString:
    """X on internal sites start, start+2, ..."""
    return PauliString.on(n, "X" * len(range(start, n, 2)), range(start, n, 2))


def parity_ops(spec: ModelSpec) -> list[PauliString]:
    """``[P]`` for tfi, ``[P1, P2]`` for tfc / cluster (see module docstring)."""
    n = spec.n_qubits
    if spec.model == "tfi":
        return [PauliString.on(n, "X" * n, range(n))]
    if n % 2:
        raise ValueError(f"sublattice parities need even n, got {n}")
    return [sublattice_parity(n, 1), sublattice_parity(n, 0)]

"""Sparse Pauli strings and real-weighted Pauli sums acting on statevectors.

Basis convention (shared by every module in the package): qubit ``i`` is bit
``i`` of the amplitude index, so site 0 is the least significant bit. A
statevector over ``n`` qubits is a complex128 array of length ``2**n``.

A Pauli string maps a basis state ``|b>`` to ``phase(b) |b ^ flip_mask>``.
Operators are applied matrix-free by flipping axes of the ``(2,) * n`` tensor
view of the state, so no index arrays are built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

AXES = ("X", "Y", "Z")


def num_qubits(psi: np.ndarray) -> int:
    """Number of qubits of a state (or batch of states along axis -1)."""
    dim = psi.shape[-1]
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"state length {dim} is not a power of two >= 2")
    return n


def _check_size(n_qubits: int, psi: np.ndarray) -> None:
    if psi.shape[-1] != 1 << n_qubits:
        raise ValueError(
            f"operator acts on {n_qubits} qubits but state has length {psi.shape[-1]}"
        )


def _bit_parity(n_qubits: int, mask: int) -> np.ndarray:
    """(-1)**popcount(b & mask) for every basis index b, as float64."""
    out = np.ones(1 << n_qubits)
    view = out.reshape((2,) * n_qubits) if n_qubits else out
    for site in range(n_qubits):
        if mask >> site & 1:
            idx = [slice(None)] * n_qubits
            idx[n_qubits - 1 - site] = 1
            view[tuple(idx)] *= -1.0
    return out


def flip_bits(psi: np.ndarray, mask: int) -> np.ndarray:
    """Return ``psi[..., b ^ mask]`` as a (possibly strided) view."""
    if mask == 0:
        return psi
    n = num_qubits(psi)
    lead = psi.shape[:-1]
    view = psi.reshape(lead + (2,) * n)
    axes = [len(lead) + n - 1 - s for s in range(n) if mask >> s & 1]
    return np.flip(view, axis=axes).reshape(psi.shape)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis on ``n_qubits`` sites.

    ``factors`` is a tuple of ``(site, axis)`` pairs with strictly increasing
    sites; an empty tuple is the identity.
    """

    n_qubits: int
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        factors = tuple((int(s), str(a).upper()) for s, a in self.factors)
        factors = tuple(sorted(factors))
        sites = [s for s, _ in factors]
        if len(set(sites)) != len(sites):
            raise ValueError(f"repeated site in {factors}")
        for s, a in factors:
            if not 0 <= s < self.n_qubits:
                raise ValueError(f"site {s} out of range for {self.n_qubits} qubits")
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def on(cls, n_qubits: int, axes: str, sites: Iterable[int]) -> "PauliString":
        """Build e.g. ``PauliString.on(6, "ZXZ", (4, 5, 0))``; sites may wrap."""
        sites = [int(s) % n_qubits for s in sites]
        if len(axes) != len(sites):
            raise ValueError("one axis letter per site required")
        return cls(n_qubits, tuple(zip(sites, axes)))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, ())

    def axis_at(self, site: int) -> str | None:
        for s, a in self.factors:
            if s == site:
                return a
        return None

    @property
    def flip_mask(self) -> int:
        return sum(1 << s for s, a in self.factors if a in "XY")

    @property
    def sign_mask(self) -> int:
        return sum(1 << s for s, a in self.factors if a in "YZ")

    @property
    def is_diagonal(self) -> bool:
        return self.flip_mask == 0

    @cached_property
    def out_phase(self) -> np.ndarray:
        """Phase multiplying the flipped amplitudes: (P psi)[b] = out_phase[b] psi[b ^ m].

        Real (float64) unless the string contains Y.
        """
        n_y = sum(1 for _, a in self.factors if a == "Y")
        phase = _bit_parity(self.n_qubits, self.sign_mask)
        phase = flip_bits(phase, self.flip_mask).copy()
        if n_y % 4 == 0:
            return phase
        return phase * (1j**n_y)

    def __str__(self) -> str:
        if not self.factors:
            return "I"
        return "".join(f"{a}{s}" for s, a in self.factors)


def strings_commute(a: PauliString, b: PauliString) -> bool:
    """True iff the two strings commute (even number of anticommuting sites)."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("strings act on different numbers of qubits")
    other = dict(b.factors)
    clashes = sum(1 for s, ax in a.factors if s in other and other[s] != ax)
    return clashes % 2 == 0


class PauliSum:
    """Real linear combination of Pauli strings with duplicates merged.

    Terms keep first-occurrence order. Complex coefficients are rejected.
    """

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]] = ()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[PauliString, float] = {}
        for coeff, string in terms:
            if isinstance(coeff, complex) or np.iscomplexobj(coeff):
                if np.imag(coeff) != 0:
                    raise TypeError(f"complex coefficient {coeff} not allowed")
                coeff = np.real(coeff)
            if string.n_qubits != n_qubits:
                raise ValueError(
                    f"string {string} has {string.n_qubits} qubits, expected {n_qubits}"
                )
            merged[string] = merged.get(string, 0.0) + float(coeff)
        self.n_qubits = n_qubits
        self.terms: tuple[tuple[float, PauliString], ...] = tuple(
            (c, s) for s, c in merged.items()
        )

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{s}" for c, s in self.terms) or "0"
        return f"PauliSum({self.n_qubits}, {body})"

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("size mismatch")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.n_qubits, [(factor * c, s) for c, s in self.terms])

    @property
    def strings(self) -> list[PauliString]:
        return [s for _, s in self.terms]

    @property
    def is_diagonal(self) -> bool:
        return all(s.is_diagonal for _, s in self.terms)

    @cached_property
    def grouped(self) -> tuple[tuple[int, np.ndarray], ...]:
        """Terms grouped by flip mask: ``((mask, summed out_phase * coeff), ...)``."""
        groups: dict[int, np.ndarray] = {}
        for coeff, s in self.terms:
            contrib = coeff * s.out_phase
            m = s.flip_mask
            if m in groups:
                acc = groups[m]
                if np.iscomplexobj(contrib) and not np.iscomplexobj(acc):
                    acc = acc.astype(complex)
                groups[m] = acc + contrib
            else:
                groups[m] = contrib
        return tuple(groups.items())

    def diagonal(self) -> np.ndarray:
        """Diagonal of a Z-only sum as a real vector."""
        if not self.is_diagonal:
            raise ValueError("sum has off-diagonal terms")
        d = np.zeros(1 << self.n_qubits)
        for _, phase in self.grouped:
            d = d + np.real(phase)
        return d


def apply_string(p: PauliString, psi: np.ndarray) -> np.ndarray:
    """Return ``P|psi>``; works on a single state or a batch along axis 0."""
    _check_size(p.n_qubits, psi)
    return p.out_phase * flip_bits(psi, p.flip_mask)


def apply_sum(h: PauliSum, psi: np.ndarray) -> np.ndarray:
    """Return ``sum_k c_k P_k |psi>`` (unnormalized)."""
    _check_size(h.n_qubits, psi)
    out = np.zeros(psi.shape, dtype=complex)
    for mask, phase in h.grouped:
        out += phase * flip_bits(psi, mask)
    return out


def expectation(h: PauliSum, psi: np.ndarray) -> float:
    """Re<psi|H|psi> for a normalized state."""
    return float(np.real(np.vdot(psi, apply_sum(h, psi))))


def dense_matrix(op: PauliString | PauliSum) -> np.ndarray:
    """Explicit 2^n x 2^n matrix via Kronecker products (small-n oracle)."""
    mats = {
        None: np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    if isinstance(op, PauliString):
        out = np.ones((1, 1), dtype=complex)
        # kron(A, B) puts A on the high bit, so iterate from the top site down
        for site in reversed(range(op.n_qubits)):
            out = np.kron(out, mats[op.axis_at(site)])
        return out
    out = np.zeros((1 << op.n_qubits,) * 2, dtype=complex)
    for c, s in op.terms:
        out += c * dense_matrix(s)
    return out


"""Statevectors and parameterized layers ``exp(-i theta G)``.

States are plain complex128 numpy arrays (see :mod:`symbreak_vqe.pauli` for the
bit-ordering convention). Every function here has value semantics: the input
array is never modified.

A layer generator ``G`` is a sum of mutually commuting Pauli strings, so its
exponential is the exact product of per-term rotations
``exp(-i theta c P) = cos(theta c) - i sin(theta c) P``. That reference path is
what :func:`apply_layer` does with ``fast=False``. The fast path recognises

* all-Z generators: one phase vector;
* single-site terms on distinct sites: a tensor product of 2x2 rotations,
  applied as small dense matrices over chunks of qubits;
* terms ``X_c prod_{a in S_c} Z_a`` whose Z-dressings form a graph
  (``a in S_c`` iff ``c in S_a`` for dressed sites): these are
  ``C X_c C`` for the graph's CZ product ``C``, a diagonal sign, so the layer
  is ``C (prod_c exp(-i theta X_c)) C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .pauli import (
    PauliString,
    PauliSum,
    apply_string,
    flip_bits,
    num_qubits,
    strings_commute,
)

_PAULI_2X2 = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
CHUNK_QUBITS = 6

# One state costs 16 * 2**n bytes: 16 MiB at n=20, 1 GiB at n=26.
MAX_QUBITS = 26


def plus_state(n: int) -> np.ndarray:
    """Uniform superposition ``|+>^n``."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    dim = 1 << n
    return np.full(dim, dim**-0.5, dtype=complex)


def basis_state(n: int, index: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    psi = np.zeros(1 << n, dtype=complex)
    psi[index] = 1.0
    return psi


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>`` with conjugation on ``a``."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def apply_rotation(p: PauliString, theta: float, psi: np.ndarray) -> np.ndarray:
    """``exp(-i theta P) psi``."""
    return np.cos(theta) * psi - 1j * np.sin(theta) * apply_string(p, psi)


@dataclass(frozen=True, eq=False)
class LayerSpec:
    """One parameterized layer of an ansatz.

    ``symmetry_tags`` lists parity operators the generator commutes with;
    ``symmetry_breaking`` marks layers that receive the offset initialisation.
    """

    label: str
    generator: PauliSum
    symmetry_tags: tuple[PauliString, ...] = ()
    symmetry_breaking: bool = False

    def __post_init__(self):
        strings = self.generator.strings
        for i, a in enumerate(strings):
            for b in strings[i + 1 :]:
                if not strings_commute(a, b):
                    raise ValueError(f"layer {self.label}: {a} and {b} do not commute")
        for tag in self.symmetry_tags:
            for s in strings:
                if not strings_commute(tag, s):
                    raise ValueError(f"layer {self.label}: tag {tag} does not commute with {s}")
        object.__setattr__(self, "symmetry_tags", tuple(self.symmetry_tags))

    @property
    def n_qubits(self) -> int:
        return self.generator.n_qubits

    @cached_property
    def diagonal(self) -> np.ndarray | None:
        """Real diagonal of G for all-Z generators, else None."""
        if self.generator.is_diagonal:
            return self.generator.diagonal()
        return None

    @cached_property
    def plan(self) -> tuple:
        """Fast-path plan: ``("diag", d)``, ``("local", coeffs, sign, chunks)`` or ``("terms",)``.

        ``coeffs`` maps site -> (axis, coefficient); ``sign`` is the CZ-graph
        diagonal (None when the terms are bare single-site Paulis).
        """
        if self.diagonal is not None:
            return ("diag", self.diagonal)
        n = self.n_qubits
        coeffs: dict[int, tuple[str, float]] = {}
        dressing: dict[int, set[int]] = {}
        for c, string in self.generator.terms:
            centers = [(s, a) for s, a in string.factors if a != "Z"]
            if len(centers) != 1 or centers[0][0] in coeffs:
                return ("terms",)
            site, axis = centers[0]
            zs = {s for s, a in string.factors if a == "Z"}
            if zs and axis != "X":
                return ("terms",)
            coeffs[site] = (axis, c)
            dressing[site] = zs
        chunks = _chunk_plan(n, coeffs)
        if not any(dressing.values()):
            return ("local", coeffs, None, chunks)
        edges = set()
        for site, zs in dressing.items():
            for a in zs:
                if a in dressing and site not in dressing[a]:
                    return ("terms",)
                edges.add((min(site, a), max(site, a)))
        sign = np.ones(1 << n)
        for a, b in edges:
            sign *= _bit_parity_pair(n, a, b)
        return ("local", coeffs, sign, chunks)

    def apply(self, theta: float, psi: np.ndarray) -> np.ndarray:
        return apply_layer(self, theta, psi)

    def apply_generator(self, psi: np.ndarray) -> np.ndarray:
        """``G psi`` (works row-wise on batches)."""
        if self.diagonal is not None:
            return self.diagonal * psi
        out = np.zeros(psi.shape, dtype=complex)
        for mask, phase in self.generator.grouped:
            out += phase * flip_bits(psi, mask)
        return out


def _check(layer: LayerSpec, psi: np.ndarray) -> None:
    if num_qubits(psi) != layer.n_qubits:
        raise ValueError(
            f"layer {layer.label} acts on {layer.n_qubits} qubits, state has {num_qubits(psi)}"
        )


def apply_layer(
    layer: LayerSpec, theta: float, psi: np.ndarray, *, fast: bool = True
) -> np.ndarray:
    """``exp(-i theta G) psi``.

    With ``fast=False`` every term goes through :func:`apply_rotation` in
    generator order (reference path).
    """
    _check(layer, psi)
    if fast:
        rows = np.array(psi, dtype=complex, ndmin=2)
        apply_layer_rows(layer, theta, rows)
        return rows.reshape(psi.shape)
    out = psi
    for coeff, string in layer.generator.terms:
        out = apply_rotation(string, theta * coeff, out)
    return out if out is not psi else psi.copy()


def _bit_parity_pair(n: int, a: int, b: int) -> np.ndarray:
    """(-1)**(b_a * b_b): the diagonal of CZ on sites a, b."""
    idx = np.arange(1 << n)
    return 1.0 - 2.0 * ((idx >> a) & (idx >> b) & 1)


def _chunk_plan(n: int, coeffs: dict[int, tuple[str, float]]) -> list[tuple]:
    """Per qubit chunk: ``(start, stop, hamming)``; ``hamming`` is set when every
    active site in the chunk carries X with one common coefficient."""
    out = []
    for start in range(0, n, CHUNK_QUBITS):
        stop = min(start + CHUNK_QUBITS, n)
        active = [s for s in range(start, stop) if s in coeffs]
        if not active:
            continue
        hamming = None
        if len({coeffs[s] for s in active}) == 1 and coeffs[active[0]][0] == "X":
            k = stop - start
            mask = sum(1 << (s - start) for s in active)
            diff = np.bitwise_xor.outer(np.arange(1 << k), np.arange(1 << k))
            weight = sum((diff & mask) >> b & 1 for b in range(k))
            hamming = (weight, (diff & ~mask) == 0, len(active), coeffs[active[0]][1])
        out.append((start, stop, hamming))
    return out


def _chunk_matrix(start, stop, hamming, theta, coeffs) -> np.ndarray:
    if hamming is not None:
        weight, allowed, n_active, c = hamming
        cos, msin = np.cos(theta * c), -1j * np.sin(theta * c)
        return np.where(allowed, cos ** (n_active - weight) * msin**weight, 0.0)
    eye = np.eye(2, dtype=complex)
    mats = []
    # kron(A, B) puts A on the more significant qubit
    for s in reversed(range(start, stop)):
        if s in coeffs:
            axis, c = coeffs[s]
            mats.append(np.cos(theta * c) * eye - 1j * np.sin(theta * c) * _PAULI_2X2[axis])
        else:
            mats.append(eye)
    return reduce(np.kron, mats)


def _apply_local(rows: np.ndarray, n: int, chunks: list[tuple], theta: float, coeffs) -> None:
    """In-place tensor product of per-site rotations, one dense matrix per chunk."""
    batch = rows.shape[0]
    for start, stop, hamming in chunks:
        mat = _chunk_matrix(start, stop, hamming, theta, coeffs)
        k = stop - start
        if start == 0:
            view = rows.reshape(batch * (1 << (n - k)), 1 << k)
            view[...] = view @ mat.T
        else:
            view = rows.reshape(batch, 1 << (n - stop), 1 << k, 1 << start)
            view[...] = np.matmul(mat, view)


def apply_layer_rows(layer: LayerSpec, theta: float, rows: np.ndarray) -> None:
    """In-place ``exp(-i theta G)`` on every row of a C-contiguous 2-D array of states."""
    plan = layer.plan
    if plan[0] == "diag":
        rows *= np.exp(-1j * theta * plan[1])
        return
    if plan[0] == "local":
        _, coeffs, sign, chunks = plan
        if sign is not None:
            rows *= sign
        _apply_local(rows, layer.n_qubits, chunks, theta, coeffs)
        if sign is not None:
            rows *= sign
        return
    for coeff, string in layer.generator.terms:
        c, s = np.cos(theta * coeff), np.sin(theta * coeff)
        flipped = string.out_phase * flip_bits(rows, string.flip_mask)
        rows *= c
        rows -= (1j * s) * flipped

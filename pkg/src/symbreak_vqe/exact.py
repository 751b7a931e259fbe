"""Reference ground-state energies and the normalized-energy metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .pauli import PauliSum, apply_sum, dense_matrix

DENSE_MAX_QUBITS = 12
DEGENERACY_TOL = 1e-8


class LanczosError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    energy: float
    method: str  # "dense" or "lanczos"
    degeneracy: int | None = None
    iterations: int | None = None

    def to_dict(self) -> dict:
        out = {"energy": self.energy, "method": self.method}
        if self.degeneracy is not None:
            out["degeneracy"] = self.degeneracy
        return out


def dense_ground(h: PauliSum) -> GroundTruth:
    """Full diagonalisation; degeneracy counts eigenvalues within 1e-8 of the minimum."""
    if h.n_qubits > DENSE_MAX_QUBITS:
        raise ValueError(f"dense path limited to {DENSE_MAX_QUBITS} qubits, got {h.n_qubits}")
    evals = np.linalg.eigvalsh(dense_matrix(h))
    e0 = float(evals[0])
    return GroundTruth(e0, "dense", int(np.sum(evals <= e0 + DEGENERACY_TOL)))


def lanczos_ground(
    h: PauliSum, tol: float = 1e-12, max_iter: int = 500, start: np.ndarray | None = None
) -> GroundTruth:
    """Lowest eigenvalue by Lanczos with full reorthogonalisation.

    The default start vector is the normalized all-ones vector. The Krylov
    space inherits every symmetry of the start vector, so for a Hamiltonian
    whose ground state lies outside the start vector's symmetry sector pass an
    explicit ``start``. If the Krylov space closes before convergence (start
    vector in a small invariant subspace) the iteration continues from a
    deterministic perturbation orthogonalized against the basis so far.

    Converges when the lowest Ritz value changes by less than ``tol`` between
    iterations; raises :class:`LanczosError` after ``max_iter`` iterations.
    """
    dim = 1 << h.n_qubits
    v = np.ones(dim, dtype=complex) if start is None else np.asarray(start, dtype=complex)
    basis = np.empty((min(32, dim), dim), dtype=complex)
    basis[0] = v / np.linalg.norm(v)
    size = 1
    alphas: list[float] = []
    betas: list[float] = []
    prev = np.inf
    fallback = np.random.default_rng(12345)

    def orthogonalize(w):
        q = basis[:size]
        for _ in range(2):
            w = w - q.T @ (q.conj() @ w)
        return w

    for it in range(1, min(max_iter, dim) + 1):
        w = apply_sum(h, basis[size - 1])
        alphas.append(float(np.real(np.vdot(basis[size - 1], w))))
        w = orthogonalize(w)
        ritz = eigh_tridiagonal(
            np.array(alphas), np.array(betas), eigvals_only=True, select="i", select_range=(0, 0)
        )[0]
        if abs(ritz - prev) < tol or it == dim:
            return GroundTruth(float(ritz), "lanczos", iterations=it)
        prev = ritz
        beta = float(np.linalg.norm(w))
        if beta < 1e-10:
            # Krylov space closed: continue in the orthogonal complement (decoupled block)
            w = orthogonalize(fallback.standard_normal(dim).astype(complex))
            beta, prev = 0.0, np.inf
            w = w / np.linalg.norm(w)
        else:
            w = w / beta
        betas.append(beta)
        if size == basis.shape[0]:
            grown = np.empty((min(2 * size, dim), dim), dtype=complex)
            grown[:size] = basis
            basis = grown
        basis[size] = w
        size += 1
    raise LanczosError(f"Lanczos did not converge within {max_iter} iterations")


def ground_truth(h: PauliSum, method: str = "auto") -> GroundTruth:
    """``auto`` uses the dense path up to 10 qubits and Lanczos beyond."""
    if method == "auto":
        method = "dense" if h.n_qubits <= 10 else "lanczos"
    if method == "dense":
        return dense_ground(h)
    if method == "lanczos":
        return lanczos_ground(h)
    raise ValueError(f"unknown method {method!r}")


def normalized_energy(e_vqe: float, e_gs: float) -> float:
    """Relative error ``(E - E_gs) / |E_gs|``; nonnegative for variational energies."""
    if e_gs == 0:
        raise ZeroDivisionError("normalized energy undefined for zero ground energy")
    return (e_vqe - e_gs) / abs(e_gs)

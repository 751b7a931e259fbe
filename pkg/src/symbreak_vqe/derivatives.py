"""Exact derivative states, energy gradients and quantum Fisher matrices.

With ``phi_k`` the state right after layer ``k`` and ``U_{>k}`` the remaining
circuit, the derivative state is

    |d_k psi> = U_{>k} (-i G_k) |phi_k>.

All ``P`` derivative states are produced together by pushing a ``(P+1, 2^n)``
buffer through the circuit: row 0 holds the running state, row ``k+1`` is
seeded with ``G_k phi_k`` once layer ``k`` has been applied and is carried
through every later layer. This costs ``~P^2 / 2`` row-layer applications and
``P * 2^n`` complex numbers of memory. The streaming variant recomputes the
overlaps pairwise with three working states instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, prepare_state
from .pauli import PauliSum, apply_sum
from .statevector import apply_layer_rows, plus_state

CENTERED = "centered"
UNCENTERED = "uncentered"
VARIANTS = (CENTERED, UNCENTERED)

# stream when storing all derivative states would exceed this many bytes
STREAM_THRESHOLD_BYTES = 4 * 2**30


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray
    variant: str

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _check_variant(variant: str) -> str:
    variant = variant.lower()
    if variant not in VARIANTS:
        raise ValueError(f"fisher variant must be one of {VARIANTS}, got {variant!r}")
    return variant


def state_and_derivatives(spec: AnsatzSpec, params) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(psi, D)`` where row ``k`` of ``D`` is ``|d_k psi>``."""
    params = spec.check_params(params)
    layers = spec.layers
    buf = np.empty((spec.n_params + 1, 1 << spec.n_qubits), dtype=complex)
    buf[0] = plus_state(spec.n_qubits)
    for k, (layer, theta) in enumerate(zip(layers, params)):
        apply_layer_rows(layer, theta, buf[: k + 1])
        buf[k + 1] = layer.apply_generator(buf[0])
    derivs = buf[1:]
    derivs *= -1j
    return buf[0], derivs


def derivative_states(spec: AnsatzSpec, params) -> np.ndarray:
    return state_and_derivatives(spec, params)[1]


def energy_gradient(h: PauliSum, spec: AnsatzSpec, params) -> np.ndarray:
    """``dE/dtheta_k = 2 Re <d_k psi|H|psi>`` by one backward sweep (adjoint method)."""
    params = spec.check_params(params)
    if h.n_qubits != spec.n_qubits:
        raise ValueError("Hamiltonian and ansatz sizes differ")
    psi = prepare_state(spec, params)
    pair = np.stack([psi, apply_sum(h, psi)])
    grad = np.empty(spec.n_params)
    layers = spec.layers
    for k in reversed(range(spec.n_params)):
        # pair[0] = phi_k, pair[1] = U_{>k}^dag H psi
        grad[k] = -2.0 * np.imag(np.vdot(layers[k].apply_generator(pair[0]), pair[1]))
        apply_layer_rows(layers[k], -params[k], pair)
    return grad


def gradient_from_states(derivs: np.ndarray, h_psi: np.ndarray) -> np.ndarray:
    return 2.0 * np.real(derivs.conj() @ h_psi)


def fisher_from_states(psi: np.ndarray, derivs: np.ndarray, variant: str = CENTERED) -> FisherMatrix:
    variant = _check_variant(variant)
    gram = derivs.conj() @ derivs.T
    f = np.real(gram)
    if variant == CENTERED:
        berry = derivs.conj() @ psi  # <d_i psi|psi>
        f = f - np.real(np.outer(berry, berry.conj()))
    return FisherMatrix(0.5 * (f + f.T), variant)


def _fisher_streaming(spec: AnsatzSpec, params: np.ndarray, variant: str) -> FisherMatrix:
    layers = spec.layers
    n_params = spec.n_params
    gram = np.zeros((n_params, n_params), dtype=complex)
    berry = np.zeros(n_params, dtype=complex)  # <psi|d_k psi>
    base = plus_state(spec.n_qubits)[None, :].copy()
    for i in range(n_params):
        apply_layer_rows(layers[i], params[i], base)
        seed = layers[i].apply_generator(base[0])
        berry[i] = -1j * np.vdot(base[0], seed)
        gram[i, i] = np.vdot(seed, seed)
        pair = np.stack([base[0], seed])
        for j in range(i + 1, n_params):
            apply_layer_rows(layers[j], params[j], pair)
            gram[i, j] = np.vdot(pair[1], layers[j].apply_generator(pair[0]))
            gram[j, i] = np.conj(gram[i, j])
    f = np.real(gram)
    if variant == CENTERED:
        f = f - np.real(np.outer(berry.conj(), berry))
    return FisherMatrix(0.5 * (f + f.T), variant)


def fisher_matrix(
    spec: AnsatzSpec, params, variant: str = CENTERED, *, streaming: bool | None = None
) -> FisherMatrix:
    """Centered ``Re(<d_i|d_j> - <d_i|psi><psi|d_j>)`` or uncentered ``Re <d_i|d_j>``.

    ``streaming=None`` picks the low-memory path only above
    :data:`STREAM_THRESHOLD_BYTES` of derivative-state storage.
    """
    variant = _check_variant(variant)
    params = spec.check_params(params)
    if streaming is None:
        streaming = spec.n_params * 16 * (1 << spec.n_qubits) > STREAM_THRESHOLD_BYTES
    if streaming:
        return _fisher_streaming(spec, params, variant)
    psi, derivs = state_and_derivatives(spec, params)
    return fisher_from_states(psi, derivs, variant)

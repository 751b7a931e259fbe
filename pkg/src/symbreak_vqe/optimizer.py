"""Quantum natural gradient descent with a decaying Tikhonov shift.

Each epoch solves ``(F + lambda_t I) x = grad`` and steps ``theta -= eta * x``
with ``lambda_t = max(lambda0 * decay**t, floor)``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lstsq

from .ansatz import AnsatzSpec, prepare_state
from .derivatives import (
    CENTERED,
    VARIANTS,
    FisherMatrix,
    fisher_from_states,
    gradient_from_states,
    state_and_derivatives,
)
from .pauli import PauliString, PauliSum, apply_string, apply_sum, expectation

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass
class OptimizerConfig:
    eta: float = 0.01
    lambda0: float = 100.0
    lambda_decay: float = 0.9
    lambda_floor: float = 1e-3
    max_epochs: int = 2000
    stop_window: int = 50
    stop_tol: float = 1e-12
    fisher_variant: str = CENTERED

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if not 0 < self.lambda_decay < 1:
            raise ValueError("lambda_decay must lie in (0, 1)")
        if self.lambda_floor <= 0:
            raise ValueError("lambda_floor must be positive")
        if self.fisher_variant not in VARIANTS:
            raise ValueError(f"fisher_variant must be one of {VARIANTS}")
        if self.max_epochs < 0 or self.stop_window < 1:
            raise ValueError("max_epochs must be >= 0 and stop_window >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    """Learning curve of one run.

    ``rows`` holds per-epoch ``(epoch, objective, energy, grad_norm, parities)``
    evaluated at the parameters *before* that epoch's update. ``final_*`` are
    evaluated at ``params``. ``status`` is ``"converged"``, ``"budget"`` or
    ``"nan"``.
    """

    params: np.ndarray
    seed: int | None = None
    epochs: list[int] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    parities: list[list[float]] = field(default_factory=list)
    final_objective: float = np.nan
    final_energy: float = np.nan
    final_parities: list[float] = field(default_factory=list)
    status: str = "budget"
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def best_energy(self) -> np.ndarray:
        """Running minimum of the recorded energies."""
        return np.minimum.accumulate(np.asarray(self.energy, dtype=float))

    @property
    def n_epochs(self) -> int:
        return len(self.epochs)


def lambda_schedule(cfg: OptimizerConfig, t: int) -> float:
    if t < 0:
        raise ValueError("epoch must be nonnegative")
    return max(cfg.lambda0 * cfg.lambda_decay**t, cfg.lambda_floor)


def natural_gradient_step(
    params: np.ndarray, grad: np.ndarray, fisher: FisherMatrix | np.ndarray, eta: float, lam: float
) -> np.ndarray:
    """``params - eta * (F + lam I)^{-1} grad`` via Cholesky (least squares if that fails)."""
    f = fisher.entries if isinstance(fisher, FisherMatrix) else np.asarray(fisher, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if f.shape != (grad.size, grad.size) or params.shape != grad.shape:
        raise ValueError("dimension mismatch between params, gradient and Fisher matrix")
    if lam <= 0:
        raise ValueError("lam must be positive")
    a = f + lam * np.eye(grad.size)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(grad))):
        raise SolverError("non-finite Fisher matrix or gradient")
    try:
        x = cho_solve(cho_factor(a, lower=True), grad)
    except LinAlgError:
        log.warning("Cholesky failed at lambda=%g; falling back to least squares", lam)
        x = lstsq(a, grad)[0]
    resid = np.linalg.norm(a @ x - grad)
    if not np.all(np.isfinite(x)) or resid > 1e-10 * max(np.linalg.norm(grad), 1e-300):
        raise SolverError(f"linear solve failed (residual {resid:.3g})")
    return params - eta * x


def penalty_objective(h: PauliSum, penalties: Sequence[tuple[float, PauliString]]) -> PauliSum:
    """``H + sum_k alpha_k P_k``; zero weights are skipped.

    A positive weight pushes the state towards the ``-1`` eigenspace of its
    parity and a negative weight towards ``+1``.
    """
    extra = []
    for alpha, parity in penalties:
        if parity.n_qubits != h.n_qubits:
            raise ValueError("penalty operator size differs from Hamiltonian")
        if alpha != 0:
            extra.append((float(alpha), parity))
    return PauliSum(h.n_qubits, list(h.terms) + extra)


def parity_values(psi: np.ndarray, track: Sequence[PauliString]) -> list[float]:
    return [float(np.real(np.vdot(psi, apply_string(p, psi)))) for p in track]


def minimize(
    objective: PauliSum,
    spec: AnsatzSpec,
    init,
    cfg: OptimizerConfig | None = None,
    track: Sequence[PauliString] = (),
    *,
    hamiltonian: PauliSum | None = None,
    seed: int | None = None,
    callback=None,
) -> RunRecord:
    """Run natural gradient descent on ``<objective>`` from ``init``.

    ``hamiltonian`` (default: the objective itself) is what the ``energy``
    column reports, so penalty runs log the raw energy next to the objective.
    Stops early once the objective spread over the last ``stop_window`` epochs
    falls below ``stop_tol``.
    """
    cfg = cfg or OptimizerConfig()
    hamiltonian = objective if hamiltonian is None else hamiltonian
    params = spec.check_params(init).copy()
    if objective.n_qubits != spec.n_qubits or hamiltonian.n_qubits != spec.n_qubits:
        raise ValueError("operator and ansatz sizes differ")
    separate = hamiltonian is not objective
    rec = RunRecord(params=params, seed=seed)

    for t in range(cfg.max_epochs):
        psi, derivs = state_and_derivatives(spec, params)
        o_psi = apply_sum(objective, psi)
        obj = float(np.real(np.vdot(psi, o_psi)))
        energy = expectation(hamiltonian, psi) if separate else obj
        grad = gradient_from_states(derivs, o_psi)
        gnorm = float(np.linalg.norm(grad))
        rec.epochs.append(t)
        rec.objective.append(obj)
        rec.energy.append(energy)
        rec.grad_norm.append(gnorm)
        rec.parities.append(parity_values(psi, track))
        if callback is not None:
            callback(t, rec)
        if not (np.isfinite(obj) and np.isfinite(gnorm)):
            rec.status, rec.message = "nan", f"non-finite objective or gradient at epoch {t}"
            log.error(rec.message)
            break
        w = cfg.stop_window
        if len(rec.objective) >= w:
            recent = rec.objective[-w:]
            if max(recent) - min(recent) < cfg.stop_tol:
                rec.status = "converged"
                break
        fisher = fisher_from_states(psi, derivs, cfg.fisher_variant)
        params = natural_gradient_step(params, grad, fisher, cfg.eta, lambda_schedule(cfg, t))

    rec.params = params
    psi = prepare_state(spec, params)
    rec.final_objective = expectation(objective, psi)
    rec.final_energy = expectation(hamiltonian, psi) if separate else rec.final_objective
    rec.final_parities = parity_values(psi, track)
    return rec

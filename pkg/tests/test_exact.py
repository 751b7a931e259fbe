import numpy as np
import pytest

from conftest import dense
from symbreak_vqe.exact import (
    LanczosError,
    dense_ground,
    ground_truth,
    lanczos_ground,
    normalized_energy,
)
from symbreak_vqe.hamiltonians import ModelSpec, build_cluster_open, build_tfi, parity_ops
from symbreak_vqe.optimizer import penalty_objective
from symbreak_vqe.pauli import PauliString, PauliSum


def test_dense_ground_examples():
    gt = dense_ground(build_tfi(3, 0.0))
    assert gt.energy == pytest.approx(-3.0)
    assert gt.degeneracy == 2
    assert gt.method == "dense"


def test_dense_ground_matches_kron_oracle(rng):
    h = build_tfi(5, 0.8)
    assert dense_ground(h).energy == pytest.approx(np.linalg.eigvalsh(dense(h))[0], abs=1e-12)


@pytest.mark.parametrize("n", [4, 6, 8])
@pytest.mark.parametrize("h", [0.0, 0.5, 2.0])
def test_lanczos_agrees_with_dense(n, h):
    for model in ("tfi", "tfc"):
        op = ModelSpec(model, n, h).hamiltonian()
        assert abs(lanczos_ground(op).energy - dense_ground(op).energy) < 1e-10


def test_cluster_degeneracy_and_lanczos():
    for n in (5, 6, 8):
        op = build_cluster_open(n)
        gt = dense_ground(op)
        assert gt.degeneracy == 4
        assert gt.energy == pytest.approx(-(n - 2))
        assert abs(lanczos_ground(op).energy - gt.energy) < 1e-10


def test_lanczos_on_tiny_and_invariant_start():
    # the all-ones start is an eigenvector of pure X fields: the Krylov space
    # closes at once and the fallback has to find the rest of the spectrum
    op = PauliSum(3, [(1.0, PauliString.on(3, "X", [i])) for i in range(3)])
    assert lanczos_ground(op).energy == pytest.approx(-3.0, abs=1e-10)
    single = PauliSum(1, [(1.0, PauliString.on(1, "Z", [0]))])
    assert lanczos_ground(single).energy == pytest.approx(-1.0)


def test_lanczos_explicit_start():
    op = build_tfi(6, 0.5)
    start = np.random.default_rng(3).normal(size=64)
    assert lanczos_ground(op, start=start).energy == pytest.approx(dense_ground(op).energy, abs=1e-10)


def test_lanczos_iteration_budget():
    with pytest.raises(LanczosError):
        lanczos_ground(build_tfi(8, 0.5), max_iter=3)


def test_ground_truth_dispatch():
    assert ground_truth(build_tfi(4, 0.5)).method == "dense"
    assert ground_truth(build_tfi(11, 0.5)).method == "lanczos"
    with pytest.raises(ValueError):
        ground_truth(build_tfi(4, 0.5), "qr")
    with pytest.raises(ValueError):
        dense_ground(build_tfi(13, 0.5))


def test_normalized_energy():
    assert normalized_energy(-9.0, -10.0) == pytest.approx(0.1)
    assert normalized_energy(-10.0, -10.0) == 0.0
    assert normalized_energy(1.5, 1.0) == pytest.approx(0.5)
    with pytest.raises(ZeroDivisionError):
        normalized_energy(1.0, 0.0)


def test_penalty_selects_negative_parity_sector():
    n = 6
    h = build_cluster_open(n)
    p1, p2 = parity_ops(ModelSpec("cluster", n))
    op = penalty_objective(h, [(2.0, p1), (2.0, p2)])
    evals, vecs = np.linalg.eigh(dense(op))
    assert evals[0] == pytest.approx(-(n - 2) - 4.0)
    assert evals[1] - evals[0] > 1.0
    g = vecs[:, 0]
    for p in (p1, p2):
        assert np.real(np.vdot(g, dense(p) @ g)) == pytest.approx(-1.0)
    # its bare energy is still the ground energy
    assert np.real(np.vdot(g, dense(h) @ g)) == pytest.approx(-(n - 2))

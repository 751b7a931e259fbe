import numpy as np
import pytest

from conftest import dense
from symbreak_vqe.hamiltonians import (
    ModelSpec,
    build_cluster_open,
    build_tfc,
    build_tfi,
    parity_ops,
)
from symbreak_vqe.pauli import PauliString, expectation, strings_commute, PauliSum
from symbreak_vqe.statevector import plus_state


def ground(h):
    return np.linalg.eigvalsh(dense(h))


def test_tfi_terms_n4():
    h = build_tfi(4, 0.5)
    expected = {PauliString.on(4, "ZZ", [i, i + 1]): -1.0 for i in range(4)}
    expected.update({PauliString.on(4, "X", [i]): -0.5 for i in range(4)})
    assert dict((s, c) for c, s in h.terms) == expected
    assert PauliString.on(4, "ZZ", [3, 0]) in expected


def test_tfi_classical_ground_energy():
    assert ground(build_tfi(3, 0.0))[0] == pytest.approx(-3.0)


@pytest.mark.parametrize("n,h", [(4, 0.5), (6, 0.5), (8, 1.3)])
def test_tfi_ground_energy_matches_free_fermions(n, h):
    # even-parity sector, antiperiodic momenta k = (2m+1) pi / n
    k = (2 * np.arange(n) + 1) * np.pi / n
    exact = -np.sum(np.sqrt(1 + h * h - 2 * h * np.cos(k)))
    assert ground(build_tfi(n, h))[0] == pytest.approx(exact, abs=1e-10)


def test_tfc_terms_and_stabilizer_energy():
    h = build_tfc(6, 0.5)
    assert len(h) == 12
    assert ground(build_tfc(6, 0.0))[0] == pytest.approx(-6.0)


def test_cluster_open_terms():
    assert len(build_cluster_open(14)) == 12
    assert all(c == -1.0 for c, _ in build_cluster_open(14).terms)
    evals = ground(build_cluster_open(4))
    assert evals[0] == pytest.approx(-2.0)


def test_cluster_open_ground_space_dimension():
    evals = ground(build_cluster_open(5))
    assert evals[0] == pytest.approx(-3.0)
    assert np.sum(evals < evals[0] + 1e-8) == 4


@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_term_counts(n):
    assert len(build_tfi(n, 0.3)) == (3 if n == 2 else 2 * n)
    if n % 2 == 0 and n >= 4:
        assert len(build_tfc(n, 0.3)) == 2 * n
    if n >= 3:
        assert len(build_cluster_open(n)) == n - 2


def test_invalid_sizes():
    with pytest.raises(ValueError):
        build_tfi(1, 0.5)
    with pytest.raises(ValueError):
        build_tfc(7, 0.5)
    with pytest.raises(ValueError):
        build_cluster_open(2)
    with pytest.raises(ValueError):
        ModelSpec("heisenberg", 4)
    with pytest.raises(ValueError):
        parity_ops(ModelSpec("cluster", 5))


def test_parity_operators():
    (p,) = parity_ops(ModelSpec("tfi", 4))
    assert p == PauliString.on(4, "XXXX", range(4))
    p1, p2 = parity_ops(ModelSpec("tfc", 6))
    # P1 on 1-based even sites -> internal odd sites
    assert p1 == PauliString.on(6, "XXX", [1, 3, 5])
    assert p2 == PauliString.on(6, "XXX", [0, 2, 4])


@pytest.mark.parametrize("model", ["tfi", "tfc", "cluster"])
@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_parities_commute_with_every_term(model, n):
    spec = ModelSpec(model, n, 0.5)
    for p in parity_ops(spec):
        assert all(strings_commute(p, s) for s in spec.hamiltonian().strings)
        assert expectation(PauliSum(n, [(1.0, p)]), plus_state(n)) == pytest.approx(1.0)


def test_large_field_limit():
    for n in (3, 6):
        for h in (10.0, 1e3):
            assert expectation(build_tfi(n, h), plus_state(n)) == pytest.approx(-h * n, rel=1e-12)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_tfi_ground_energy_monotone_in_field(n):
    fields = np.linspace(0.0, 2.0, 9)
    energies = [ground(build_tfi(n, h))[0] for h in fields]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

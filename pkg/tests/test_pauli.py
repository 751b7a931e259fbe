import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense, random_state, random_string, random_sum
from symbreak_vqe.hamiltonians import build_tfi
from symbreak_vqe.pauli import (
    PauliString,
    PauliSum,
    apply_string,
    apply_sum,
    dense_matrix,
    expectation,
    strings_commute,
)
from symbreak_vqe.statevector import basis_state, plus_state


def test_z_on_one_gives_minus_sign():
    out = apply_string(PauliString.on(1, "Z", [0]), basis_state(1, 1))
    np.testing.assert_allclose(out, -basis_state(1, 1))


def test_x_flips_zero_to_one():
    out = apply_string(PauliString.on(1, "X", [0]), basis_state(1, 0))
    np.testing.assert_allclose(out, basis_state(1, 1))


def test_y_phases():
    y = PauliString.on(1, "Y", [0])
    np.testing.assert_allclose(apply_string(y, basis_state(1, 0)), 1j * basis_state(1, 1))
    np.testing.assert_allclose(apply_string(y, basis_state(1, 1)), -1j * basis_state(1, 0))


def test_site_zero_is_least_significant_bit():
    out = apply_string(PauliString.on(3, "X", [0]), basis_state(3, 0))
    assert out[1] == 1.0
    out = apply_string(PauliString.on(3, "X", [2]), basis_state(3, 0))
    assert out[4] == 1.0


@pytest.mark.parametrize("n", [1, 3, 6])
def test_global_flip_leaves_plus_state(n):
    p = PauliString.on(n, "X" * n, range(n))
    np.testing.assert_allclose(apply_string(p, plus_state(n)), plus_state(n), atol=1e-15)


def test_apply_sum_examples():
    np.testing.assert_allclose(apply_sum(build_tfi(3, 0.0), basis_state(3, 0)), -3 * basis_state(3, 0))
    psi = plus_state(4)
    assert np.vdot(psi, apply_sum(build_tfi(4, 0.5), psi)) == pytest.approx(-2.0, abs=1e-14)
    assert not apply_sum(PauliSum(3), random_state(3, np.random.default_rng(0))).any()


def test_expectation_examples():
    assert expectation(build_tfi(4, 0.5), plus_state(4)) == pytest.approx(-2.0, abs=1e-14)
    assert expectation(build_tfi(3, 0.0), basis_state(3, 0)) == pytest.approx(-3.0, abs=1e-14)
    p1 = PauliSum(4, [(1.0, PauliString.on(4, "XX", [1, 3]))])
    assert expectation(p1, plus_state(4)) == pytest.approx(1.0, abs=1e-14)


def test_expectation_imaginary_residual_small(rng):
    h, psi = build_tfi(6, 0.7), random_state(6, rng)
    assert abs(np.imag(np.vdot(psi, apply_sum(h, psi)))) < 1e-10


def test_strings_commute_examples():
    n = 5
    assert strings_commute(PauliString.on(n, "ZZ", [0, 1]), PauliString.on(n, "ZZ", [1, 2]))
    assert not strings_commute(PauliString.on(n, "X", [0]), PauliString.on(n, "Z", [0]))
    assert strings_commute(PauliString.on(n, "ZXZ", [0, 1, 2]), PauliString.on(n, "ZXZ", [2, 3, 4]))


def test_strings_commute_matches_dense(rng):
    for _ in range(50):
        a, b = random_string(3, rng), random_string(3, rng)
        da, db = dense(a), dense(b)
        assert strings_commute(a, b) == np.allclose(da @ db, db @ da)


def test_duplicate_strings_merge():
    h = build_tfi(2, 0.5)
    zz = [c for c, s in h.terms if s == PauliString.on(2, "ZZ", [0, 1])]
    assert zz == [-2.0]
    assert len(h) == 3


def test_complex_coefficients_rejected():
    with pytest.raises(TypeError):
        PauliSum(1, [(1j, PauliString.on(1, "X", [0]))])


def test_string_validation():
    with pytest.raises(ValueError):
        PauliString(2, ((0, "X"), (0, "Z")))
    with pytest.raises(ValueError):
        PauliString(2, ((2, "X"),))
    with pytest.raises(ValueError):
        PauliString(2, ((0, "W"),))
    assert PauliString(3, ((2, "z"), (0, "X"))).factors == ((0, "X"), (2, "Z"))


def test_size_mismatch_raises():
    with pytest.raises(ValueError):
        apply_string(PauliString.on(2, "X", [0]), plus_state(3))
    with pytest.raises(ValueError):
        apply_sum(build_tfi(3, 1.0), plus_state(4))
    with pytest.raises(ValueError):
        strings_commute(PauliString.on(2, "X", [0]), PauliString.on(3, "X", [0]))


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_apply_sum_matches_dense_oracle(n, rng):
    for _ in range(5):
        h, psi = random_sum(n, rng), random_state(n, rng)
        np.testing.assert_allclose(apply_sum(h, psi), dense(h) @ psi, atol=1e-12, rtol=0)


def test_library_dense_matrix_matches_oracle(rng):
    h = random_sum(4, rng)
    np.testing.assert_allclose(dense_matrix(h), dense(h), atol=1e-14)


def test_apply_string_on_batches(rng):
    p = random_string(4, rng)
    rows = np.stack([random_state(4, rng) for _ in range(3)])
    out = apply_string(p, rows)
    for r, o in zip(rows, out):
        np.testing.assert_allclose(o, apply_string(p, r))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 7))
def test_string_is_unitary_involution(seed, n):
    rng = np.random.default_rng(seed)
    p, psi = random_string(n, rng), random_state(n, rng)
    out = apply_string(p, psi)
    assert abs(np.linalg.norm(out) - np.linalg.norm(psi)) < 1e-12
    assert np.max(np.abs(apply_string(p, out) - psi)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_expectation_equals_overlap(seed, n):
    rng = np.random.default_rng(seed)
    h, psi = random_sum(n, rng), random_state(n, rng)
    assert abs(expectation(h, psi) - np.real(np.vdot(psi, apply_sum(h, psi)))) < 1e-12

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qinfo.linalg import (
    H,
    I2,
    X,
    Z,
    basis,
    eig_hermitian,
    ket,
    matrix_sqrt_psd,
    partial_trace,
    projector,
    schmidt_decompose,
    tensor,
)
from qinfo.states import random_density, random_ket

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def test_tensor_identity_and_projector_placement():
    assert np.allclose(tensor(I2, I2), np.eye(4))
    p = tensor(projector(basis(2, 0)), projector(basis(2, 1)))
    assert np.allclose(p, np.diag([0, 1, 0, 0]))


def test_tensor_x_z_entries():
    m = tensor(X, Z)
    expected = np.zeros((4, 4))
    expected[0, 2], expected[1, 3], expected[2, 0], expected[3, 1] = 1, -1, 1, -1
    assert np.array_equal(m, expected)


def test_tensor_index_formula():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 2))
    m = tensor(a, b)
    for i, j, k, l in np.ndindex(2, 3, 3, 2):
        assert m[i * 3 + k, j * 2 + l] == a[i, j] * b[k, l]


def test_tensor_associative():
    rng = np.random.default_rng(0)
    a, b, c = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in (2, 3, 2))
    assert np.max(np.abs(np.kron(np.kron(a, b), c) - np.kron(a, np.kron(b, c)))) < 1e-12
    assert np.allclose(tensor(a, b, c), np.kron(np.kron(a, b), c), atol=1e-12)


def test_partial_trace_singlet_and_phi_plus():
    assert np.allclose(partial_trace(projector(SINGLET), [2, 2], [0]), np.eye(2) / 2, atol=1e-12)
    phi = ket(1, 0, 0, 1)
    # expand <0|Ψ><Ψ|0> + <1|Ψ><Ψ|1> on A: each term is |i><i|/2
    assert np.allclose(partial_trace(projector(phi), [2, 2], [1]), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product_recovers_factor():
    rng = np.random.default_rng(1)
    rho = random_density(3, rng)
    full = tensor(projector(basis(2, 0)), rho)
    assert np.allclose(partial_trace(full, [2, 3], [1]), rho, atol=1e-12)


def test_partial_trace_three_factors_matches_einsum():
    rng = np.random.default_rng(2)
    rho = random_density(12, rng)
    t = rho.reshape(2, 3, 2, 2, 3, 2)
    assert np.allclose(partial_trace(rho, [2, 3, 2], [0, 2]), np.einsum("abcdbf->acdf", t).reshape(4, 4))
    assert np.allclose(partial_trace(rho, [2, 3, 2], [1]), np.einsum("abcaec->be", t))


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(ValueError, match="incompatible factorization"):
        partial_trace(np.eye(4) / 4, [2, 3], [0])
    with pytest.raises(ValueError, match="incompatible factorization"):
        partial_trace(np.eye(4) / 4, [2, 2], [2])


def test_partial_trace_preserves_trace_on_random_states():
    rng = np.random.default_rng(4)
    for _ in range(50):
        da, db = rng.integers(1, 5, size=2)
        rho = random_density(da * db, rng)
        for keep in ([0], [1], []):
            assert abs(np.trace(partial_trace(rho, [da, db], keep)) - 1) < 1e-10


def test_eig_examples():
    e = eig_hermitian(np.eye(2) / 2)
    assert np.allclose(e.eigenvalues, [0.5, 0.5])
    e = eig_hermitian(Z)
    assert np.allclose(e.eigenvalues, [1, -1])
    assert np.allclose(e.vector(0), [1, 0]) and np.allclose(e.vector(1), [0, 1])
    assert np.allclose(eig_hermitian(H).eigenvalues, [1, -1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 33])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = a + a.conj().T
    e = eig_hermitian(m, method="jacobi")
    assert np.allclose(e.eigenvalues, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-9)
    v = e.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
    assert np.max(np.abs(m @ v - v * e.eigenvalues)) < 1e-8


def test_eig_is_deterministic_under_degeneracy():
    m = np.diag([2.0, 1.0, 1.0, 1.0])
    a = eig_hermitian(m)
    b = eig_hermitian(m.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    assert np.allclose(a.eigenvectors, np.eye(4))


def test_eig_lapack_branch_agrees():
    rng = np.random.default_rng(9)
    m = random_density(80, rng)
    e = eig_hermitian(m)
    assert np.allclose(m @ e.eigenvectors, e.eigenvectors * e.eigenvalues, atol=1e-8)


def test_matrix_sqrt_examples():
    assert np.allclose(matrix_sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2, 3]))
    plus = projector(ket(1, 1))
    assert np.allclose(matrix_sqrt_psd(plus), plus)
    with pytest.raises(ValueError):
        matrix_sqrt_psd(np.diag([1.0, -0.1]))


def test_matrix_sqrt_squares_back():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = random_density(4, rng, rank=2)
        s = matrix_sqrt_psd(m)
        assert np.allclose(s @ s, m, atol=1e-8)
        assert np.linalg.eigvalsh(s).min() > -1e-10


def test_schmidt_examples():
    assert np.allclose(schmidt_decompose(SINGLET, 2, 2).coefficients, [2**-0.5, 2**-0.5])
    assert np.allclose(schmidt_decompose(np.kron(ket(1, 0), ket(1, 1)), 2, 2).coefficients, [1, 0])
    s = schmidt_decompose(np.sqrt([0.9, 0, 0, 0.1]).astype(complex), 2, 2)
    assert np.allclose(s.coefficients, np.sqrt([0.9, 0.1]))
    with pytest.raises(ValueError):
        schmidt_decompose(SINGLET, 2, 3)


def _check_schmidt(psi, da, db):
    s = schmidt_decompose(psi, da, db)
    assert abs(np.sum(s.coefficients**2) - 1) < 1e-10
    assert np.all(np.diff(s.coefficients) <= 1e-12)
    k = min(da, db)
    assert np.allclose(s.basis_a.conj().T @ s.basis_a, np.eye(k), atol=1e-10)
    assert np.allclose(s.basis_b.conj().T @ s.basis_b, np.eye(k), atol=1e-10)
    assert np.max(np.abs(s.reconstruct() - psi)) < 1e-10
    # cross-check: singular values of the coefficient matrix
    assert np.allclose(s.coefficients, np.linalg.svd(psi.reshape(da, db), compute_uv=False), atol=1e-8)
    rho_a = partial_trace(projector(psi), [da, db], [0])
    assert np.allclose(np.sort(np.linalg.eigvalsh(rho_a))[::-1][:k], s.coefficients**2, atol=1e-8)
    return s


def test_schmidt_round_trip_100_random_states():
    rng = np.random.default_rng(11)
    for _ in range(100):
        da, db = (int(x) for x in rng.integers(1, 5, size=2))
        _check_schmidt(random_ket(da * db, rng), da, db)


def test_schmidt_rank_matches_reduced_rank():
    rng = np.random.default_rng(12)
    a = np.linalg.qr(rng.normal(size=(4, 2)))[0]
    b = np.linalg.qr(rng.normal(size=(3, 2)))[0]
    psi = (0.8 * np.kron(a[:, 0], b[:, 0]) + 0.6 * np.kron(a[:, 1], b[:, 1])).astype(complex)
    s = _check_schmidt(psi, 4, 3)
    assert s.rank == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_schmidt_property(da, db, seed):
    _check_schmidt(random_ket(da * db, np.random.default_rng(seed)), da, db)

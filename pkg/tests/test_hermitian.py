import numpy as np
import pytest

from gptembed.hermitian import chi, chi_vector, hermitian_basis, quaternionic_basis


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_hermitian_basis_is_trace_orthonormal(n):
    B = hermitian_basis(n).basis
    assert len(B) == n * n
    G = np.real(np.einsum("aij,bji->ab", B, B))
    assert np.allclose(G, np.eye(n * n), atol=1e-12)
    assert np.allclose(B[0], np.eye(n) / np.sqrt(n))
    assert all(np.allclose(b, b.conj().T) for b in B)


@pytest.mark.parametrize("n", [2, 3])
def test_vec_mat_round_trip_preserves_trace_pairing(n, rng):
    basis = hermitian_basis(n)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Y = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    X, Y = X + X.conj().T, Y + Y.conj().T
    assert np.allclose(basis.mat(basis.vec(X)), X)
    assert basis.vec(X) @ basis.vec(Y) == pytest.approx(np.real(np.trace(X @ Y)))


@pytest.mark.parametrize("n", [2, 3])
def test_quaternionic_basis(n):
    qb = quaternionic_basis(n)
    B = qb.basis
    assert len(B) == 2 * n * n - n == qb.dim
    G = 0.5 * np.real(np.einsum("aij,bji->ab", B, B))
    assert np.allclose(G, np.eye(qb.dim), atol=1e-12)
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    # complex representations of quaternionic matrices commute with J conj
    for b in B:
        assert np.allclose(b, b.conj().T)
        assert np.allclose(J @ b.conj(), b @ J)


def test_chi_is_multiplicative(rng):
    n = 2
    A1, B1, A2, B2 = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(4))
    # (A1 + B1 j)(A2 + B2 j) = (A1 A2 - B1 conj(B2)) + (A1 B2 + B1 conj(A2)) j
    prod = chi(A1 @ A2 - B1 @ B2.conj(), A1 @ B2 + B1 @ A2.conj())
    assert np.allclose(chi(A1, B1) @ chi(A2, B2), prod)


def test_chi_vector_projector_has_trace_two():
    v = chi_vector([1, 0], [0, 0])
    assert np.trace(v @ v.conj().T).real == pytest.approx(2.0)

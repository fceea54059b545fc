"""Trace-orthonormal real coordinates for Hermitian matrix spaces.

Complex Hermitian n x n matrices get n^2 coordinates and quaternionic
Hermitian n x n matrices get 2n^2 - n. In both cases the coordinate dot
product equals the (real part of the) trace pairing, so the plain dot
product can be used everywhere downstream. Quaternionic matrices are only
ever handled through their 2n x 2n complex representation
``A + B j -> [[A, B], [-conj(B), conj(A)]]``.
"""
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument

SQ2 = np.sqrt(2.0)


class HermitianBasis:
    """Orthonormal basis of H_n(C) under ``tr(XY)``; the first element is ``I/sqrt(n)``."""

    def __init__(self, n):
        if n < 1:
            raise InvalidArgument("basis size must be positive")
        self.n = n
        mats = [np.eye(n, dtype=complex) / np.sqrt(n)]
        for j in range(n):
            for k in range(j + 1, n):
                s = np.zeros((n, n), dtype=complex)
                s[j, k] = s[k, j] = 1 / SQ2
                a = np.zeros((n, n), dtype=complex)
                a[j, k] = -1j / SQ2
                a[k, j] = 1j / SQ2
                mats += [s, a]
        for l in range(1, n):
            # generalized Gell-Mann diagonal elements
            d = np.zeros(n)
            d[:l] = 1.0
            d[l] = -l
            mats.append(np.diag(d / np.sqrt(l * (l + 1))).astype(complex))
        self.basis = np.array(mats)

    @property
    def dim(self):
        return self.n ** 2

    def vec(self, X):
        """Coordinates of one Hermitian matrix or a stack of them."""
        return np.real(np.einsum("kij,...ji->...k", self.basis, np.asarray(X)))

    def mat(self, v):
        return np.einsum("...k,kij->...ij", np.asarray(v, dtype=float), self.basis)


class QuaternionicBasis:
    """Orthonormal basis of H_n(H) under ``Re tr(XY)``, stored in the complex representation."""

    def __init__(self, n):
        if n < 1:
            raise InvalidArgument("basis size must be positive")
        self.n = n
        mats = []
        for i in range(n):
            A = np.zeros((n, n), dtype=complex)
            A[i, i] = 1.0
            mats.append(chi(A, np.zeros((n, n))))
        for i in range(n):
            for j in range(i + 1, n):
                E = np.zeros((n, n))
                E[i, j] = 1.0
                sym = (E + E.T) / SQ2
                anti = (E - E.T) / SQ2
                Z = np.zeros((n, n))
                mats.append(chi(sym, Z))          # real
                mats.append(chi(1j * anti, Z))    # i
                mats.append(chi(Z, anti))         # j
                mats.append(chi(Z, 1j * anti))    # k
        self.basis = np.array(mats)

    @property
    def dim(self):
        return 2 * self.n ** 2 - self.n

    def vec(self, C):
        """Coordinates of a matrix (or stack) given in the complex representation."""
        return 0.5 * np.real(np.einsum("kij,...ji->...k", self.basis, np.asarray(C)))

    def mat(self, v):
        """Complex representation of the quaternionic matrix with coordinates ``v``."""
        return np.einsum("...k,kij->...ij", np.asarray(v, dtype=float), self.basis)


def chi(A, B):
    """Complex 2n x 2n representation of the quaternionic matrix ``A + B j``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    return np.block([[A, B], [-B.conj(), A.conj()]])


def chi_vector(a, b):
    """Complex 2n x 2 representation of the quaternionic column vector ``a + b j``."""
    a = np.asarray(a, dtype=complex).reshape(-1, 1)
    b = np.asarray(b, dtype=complex).reshape(-1, 1)
    return np.block([[a, b], [-b.conj(), a.conj()]])


@lru_cache(maxsize=None)
def hermitian_basis(n):
    return HermitianBasis(n)


@lru_cache(maxsize=None)
def quaternionic_basis(n):
    return QuaternionicBasis(n)

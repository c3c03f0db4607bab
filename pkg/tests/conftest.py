import numpy as np
import pytest

from loschmidt import _kernels

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
I2 = np.eye(2)


def site_op(op, i, L):
    """Kronecker embedding of a single-site operator (independent of the
    bitwise builder; used as the brute-force construction oracle)."""
    out = np.array([[1.0]])
    for j in range(L):
        out = np.kron(out, op if j == i else I2)
    return out


def tfim_kron(L, g, periodic=True, coupling=1.0):
    """Reference chain Hamiltonian assembled purely from np.kron."""
    H = np.zeros((2**L, 2**L))
    bonds = [(i, (i + 1) % L) for i in range(L)] if periodic else [(i, i + 1) for i in range(L - 1)]
    for i, j in bonds:
        H += -(coupling / 2.0) * site_op(SZ, i, L) @ site_op(SZ, j, L)
    for i in range(L):
        H += -(g / 2.0) * site_op(SX, i, L)
    return H


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger jit compilation once so timed checks measure compute only."""
    psi = np.ones(4, dtype=np.complex128)
    _kernels.pauli_matvec(psi, np.array([1], dtype=np.int64), np.array([2], dtype=np.int64), np.array([0.5]))
    _kernels.survival_amplitudes(np.array([1.0]), np.array([0.3]), np.array([0.0, 1.0]))

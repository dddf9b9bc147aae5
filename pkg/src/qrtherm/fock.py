"""Truncated Fock-space and qubit operators.

Full-system operators live on resonator (x) qubit, resonator first. The
qubit basis is ordered (up, down) with sigma_z |up> = +|up>.
"""

import numpy as np
import scipy.linalg

# Kronecker ordering used everywhere in the package.
TENSOR_ORDER = ("resonator", "qubit")
QUBIT_DIM = 2
MAX_DIM = 4096
MAX_DISPLACEMENT = 5.0

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _check_nmax(n_max):
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max!r}")
    return int(n_max)


def annihilation(n_max):
    """Photon lowering operator on the levels 0..n_max."""
    n_max = _check_nmax(n_max)
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def creation(n_max):
    return annihilation(n_max).conj().T


def number(n_max):
    n_max = _check_nmax(n_max)
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


def pauli(axis):
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of x, y, z") from None


def tensor(left, right):
    """Kronecker product ``left (x) right``, refusing dimensions above MAX_DIM."""
    left = np.asarray(left)
    right = np.asarray(right)
    dim = left.shape[0] * right.shape[0]
    if dim > MAX_DIM:
        raise ValueError(f"tensor product dimension {dim} exceeds the limit {MAX_DIM}")
    return np.kron(left, right)


def basis_index(n, qubit, n_max):
    """Row index of |n> (x) |qubit> in the full space; qubit 0 is up, 1 is down."""
    if not 0 <= n <= n_max:
        raise IndexError(f"photon number {n} outside 0..{n_max}")
    if qubit not in (0, 1):
        raise IndexError(f"qubit index must be 0 (up) or 1 (down), got {qubit}")
    return QUBIT_DIM * n + qubit


def resonator_op(op):
    """Embed a resonator-only operator into the full space."""
    return tensor(op, np.eye(QUBIT_DIM))


def qubit_op(op, n_max):
    """Embed a qubit-only operator into the full space."""
    return tensor(np.eye(_check_nmax(n_max) + 1), op)


def displacement(n_max, displacement_amplitude):
    """exp[amplitude * (a - a^dagger)] on the truncated resonator space.

    The generator is anti-Hermitian, so the exponential is evaluated through
    the eigendecomposition of the Hermitian matrix i*(a - a^dagger).
    """
    amp = float(displacement_amplitude)
    if abs(amp) > MAX_DISPLACEMENT:
        raise ValueError(f"|displacement amplitude| must be <= {MAX_DISPLACEMENT}, got {amp}")
    a = annihilation(n_max)
    herm = 1j * (a - a.conj().T)
    w, v = scipy.linalg.eigh(herm)
    # exp(amp * G) with G = -i * herm
    return (v * np.exp(-1j * amp * w)) @ v.conj().T


def is_hermitian(mat, rtol=1e-12):
    mat = np.asarray(mat)
    scale = np.max(np.abs(mat)) if mat.size else 0.0
    return np.max(np.abs(mat - mat.conj().T), initial=0.0) <= rtol * max(scale, np.finfo(float).tiny)

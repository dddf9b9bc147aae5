"""Composite qubit-resonator Hamiltonian, its spectrum and analytic limits.

Energies are in units of the resonator frequency omega0, which is fixed to 1.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import fock

DEFAULT_NMAX = 30


@dataclass(frozen=True)
class ModelParams:
    epsilon: float = 1.5
    lam: float = 0.01
    theta: float = 0.0
    n_max: int = DEFAULT_NMAX
    omega0: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.lam >= 0:
            raise ValueError(f"coupling lam must be non-negative, got {self.lam}")
        if not -1e-12 <= self.theta <= np.pi / 2 + 1e-12:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if int(self.n_max) != self.n_max or self.n_max < 5:
            raise ValueError(f"n_max must be an integer >= 5, got {self.n_max}")
        if self.omega0 != 1.0:
            raise ValueError("omega0 is the unit of energy and must equal 1")

    @property
    def dim(self):
        return fock.QUBIT_DIM * (self.n_max + 1)

    def replace(self, **changes):
        kwargs = dict(epsilon=self.epsilon, lam=self.lam, theta=self.theta,
                      n_max=self.n_max, omega0=self.omega0)
        kwargs.update(changes)
        return ModelParams(**kwargs)


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray
    params: ModelParams = None

    @property
    def dim(self):
        return len(self.energies)

    def truncation_cut(self, fraction=0.2):
        """Index of the first level in the top ``fraction`` of the spectrum."""
        return int(np.floor((1.0 - fraction) * self.dim))

    def expect_diag(self, op):
        """<phi_k|op|phi_k> for every eigenvector."""
        return np.einsum("ik,ij,jk->k", self.vectors.conj(), op, self.vectors)

    def in_eigenbasis(self, op):
        return self.vectors.conj().T @ op @ self.vectors


@dataclass(frozen=True)
class JCSolution:
    """Rotating-wave (Jaynes-Cummings) eigensolution for n = 0..n_max-1.

    ``mixing`` holds the angles theta_n with tan(theta_n) = 2 lam sqrt(n+1) / (eps - omega0).
    """
    n: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    mixing: np.ndarray

    @property
    def gap(self):
        return self.e_plus - self.e_minus

    def coefficients(self, n):
        """(cos, sin) of theta_n/2, the amplitudes on |n,up> and |n+1,down>."""
        half = 0.5 * self.mixing[n]
        return np.cos(half), np.sin(half)


@dataclass(frozen=True)
class LongitudinalSolution:
    n: np.ndarray
    e_up: np.ndarray
    e_down: np.ndarray
    # |phi_n^up> = exp[g (a - a^dag)] |n>|up>, |phi_n^down> uses -g
    displacement: float = field(default=0.0)


def build_hamiltonian(params):
    eps, lam, th, w0 = params.epsilon, params.lam, params.theta, params.omega0
    a = fock.annihilation(params.n_max)
    x = a + a.conj().T
    num = a.conj().T @ a
    sz = fock.pauli("z")
    sx = fock.pauli("x")
    eye_r = np.eye(params.n_max + 1)
    eye_q = np.eye(fock.QUBIT_DIM)
    h = (0.5 * eps) * fock.tensor(eye_r, sz) + w0 * fock.tensor(num, eye_q)
    if lam != 0.0:
        h = h + lam * fock.tensor(x, np.cos(th) * sx + np.sin(th) * sz)
    # the coupling is real; keep the matrix exactly Hermitian
    return 0.5 * (h + h.conj().T)


def diagonalize(h, params=None):
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("Hamiltonian must be a square matrix")
    if not fock.is_hermitian(h):
        raise ValueError("Hamiltonian is not Hermitian")
    if np.all(np.abs(h.imag) == 0):
        energies, vectors = scipy.linalg.eigh(h.real)
        vectors = vectors.astype(complex)
    else:
        energies, vectors = scipy.linalg.eigh(h)
    return EigenSystem(energies=energies, vectors=vectors, params=params)


def solve(params):
    """Build and diagonalize the Hamiltonian for ``params``."""
    return diagonalize(build_hamiltonian(params), params)


def jc_solution(params):
    eps, lam, w0 = params.epsilon, params.lam, params.omega0
    detuning = eps - w0
    if detuning == 0.0 and lam == 0.0:
        raise ValueError("mixing angle undefined at resonance with zero coupling")
    n = np.arange(params.n_max)
    root = np.sqrt(0.25 * detuning ** 2 + lam ** 2 * (n + 1))
    e_plus = (n + 0.5) * w0 + root
    e_minus = (n + 0.5) * w0 - root
    # arctan keeps theta_n in (-pi/2, pi/2); at exact resonance it is +-pi/2
    if detuning == 0.0:
        mixing = np.full(n.shape, 0.5 * np.pi)
    else:
        mixing = np.arctan(2 * lam * np.sqrt(n + 1) / detuning)
    return JCSolution(n=n, e_plus=e_plus, e_minus=e_minus, mixing=mixing)


def longitudinal_solution(params):
    eps, lam, w0 = params.epsilon, params.lam, params.omega0
    n = np.arange(params.n_max + 1)
    shift = lam ** 2 / w0
    return LongitudinalSolution(
        n=n,
        e_up=w0 * n + 0.5 * eps - shift,
        e_down=w0 * n - 0.5 * eps - shift,
        displacement=lam / w0,
    )

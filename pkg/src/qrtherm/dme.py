"""Dressed master equation in the eigenbasis of the system Hamiltonian.

Only the population (diagonal) part of the dressed master equation is
solved. In the eigenbasis the dissipator does not feed coherences back into
populations, and the steady-state coherences are neglected.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from . import fock

# gaps at or below this are treated as degenerate (zero-frequency limit)
OMEGA_THRESH = 1e-8
# |<n|A|m>|^2 below this is stored as an exact zero
COUPLING_FLOOR = 1e-24

BATH_LABELS = ("R", "Q")


class DisconnectedStateSpace(ValueError):
    """The rate generator has more than one closed class of states."""

    def __init__(self, blocks):
        self.blocks = [sorted(int(i) for i in b) for b in blocks]
        shown = "; ".join(str(b[:8]) + ("..." if len(b) > 8 else "") for b in self.blocks)
        super().__init__(f"steady state is not unique: {len(self.blocks)} closed blocks [{shown}]")


@dataclass(frozen=True)
class BathSpec:
    label: str
    alpha: float = 0.001
    omega_c: float = 10.0
    temperature: float = 1.0

    def __post_init__(self):
        if self.label not in BATH_LABELS:
            raise ValueError(f"bath label must be 'R' or 'Q', got {self.label!r}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if not self.temperature >= 0:
            raise ValueError(f"temperature must be non-negative, got {self.temperature}")

    def coupling_operator(self, n_max):
        """A_R = a^dagger + a or A_Q = sigma_x on the full space."""
        if self.label == "R":
            a = fock.annihilation(n_max)
            return fock.resonator_op(a + a.conj().T)
        return fock.qubit_op(fock.pauli("x"), n_max)


def ohmic_density(omega, bath):
    """gamma(w) = pi * alpha * w * exp(-w / omega_c) for w >= 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("ohmic_density takes |omega|; got a negative frequency")
    out = np.pi * bath.alpha * omega * np.exp(-omega / bath.omega_c)
    return out if out.ndim else float(out)


def bose_occupation(omega, temperature):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("bose_occupation requires omega > 0")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        out = np.zeros_like(omega)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(omega / temperature)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BathRates:
    bath: BathSpec
    coupling_sq: np.ndarray  # |<phi_n|A|phi_m>|^2
    up: np.ndarray           # up[n, m], n > m: rate m -> n
    down: np.ndarray         # down[n, m], n > m: rate n -> m


@dataclass(frozen=True)
class TransitionRateTable:
    """Dressed rates for every ordered pair n > m (energies ascending).

    ``finite`` marks pairs whose gap exceeds OMEGA_THRESH; the others carry
    the symmetric zero-frequency rate and transport no energy.
    """
    energies: np.ndarray
    gaps: np.ndarray
    pairs: np.ndarray
    finite: np.ndarray
    baths: dict

    @property
    def dim(self):
        return len(self.energies)

    def __getitem__(self, label):
        return self.baths[label]


def _pair_mask(dim):
    return np.tril(np.ones((dim, dim), dtype=bool), k=-1)


def bath_rates(eig, bath, n_max=None):
    if n_max is None:
        n_max = eig.params.n_max
    energies = eig.energies
    dim = len(energies)
    pairs = _pair_mask(dim)
    gaps = energies[:, None] - energies[None, :]
    finite = pairs & (gaps > OMEGA_THRESH)
    degenerate = pairs & ~finite

    a_eig = eig.in_eigenbasis(bath.coupling_operator(n_max))
    csq = np.abs(a_eig) ** 2
    csq[csq < COUPLING_FLOOR] = 0.0

    up = np.zeros((dim, dim))
    down = np.zeros((dim, dim))
    w = gaps[finite]
    gamma = ohmic_density(w, bath)
    if bath.temperature > 0:
        with np.errstate(over="ignore"):
            occ = 1.0 / np.expm1(w / bath.temperature)
    else:
        occ = np.zeros_like(w)
    up[finite] = gamma * occ * csq[finite]
    down[finite] = gamma * (1.0 + occ) * csq[finite]
    # lim_{w->0} gamma(w) n(w) = pi alpha T
    zero_freq = np.pi * bath.alpha * bath.temperature * csq[degenerate]
    up[degenerate] = zero_freq
    down[degenerate] = zero_freq
    return BathRates(bath=bath, coupling_sq=csq, up=up, down=down)


def transition_rates(eig, baths):
    labels = [b.label for b in baths]
    if sorted(labels) != sorted(BATH_LABELS):
        raise ValueError(f"need exactly one R bath and one Q bath, got {labels}")
    gram = eig.vectors.conj().T @ eig.vectors
    if np.max(np.abs(gram - np.eye(len(eig.energies)))) > 1e-10:
        raise ValueError("eigenvectors are not orthonormal")
    energies = eig.energies
    dim = len(energies)
    pairs = _pair_mask(dim)
    gaps = np.where(pairs, energies[:, None] - energies[None, :], 0.0)
    finite = pairs & (gaps > OMEGA_THRESH)
    n_max = eig.params.n_max if eig.params is not None else dim // fock.QUBIT_DIM - 1
    rates = {b.label: bath_rates(eig, b, n_max) for b in baths}
    return TransitionRateTable(energies=energies, gaps=gaps, pairs=pairs,
                               finite=finite, baths=rates)


@dataclass(frozen=True)
class RateMatrix:
    """Population generator: generator[n, m] is the total rate m -> n."""
    generator: np.ndarray

    @property
    def dim(self):
        return self.generator.shape[0]


def build_rate_matrix(table):
    dim = table.dim
    w = np.zeros((dim, dim))
    for rates in table.baths.values():
        w += rates.up          # m -> n, upward
        w += rates.down.T      # n -> m, downward
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, -w.sum(axis=0))
    return RateMatrix(generator=w)


@dataclass(frozen=True)
class SteadyState:
    populations: np.ndarray
    residual: float = 0.0

    def __len__(self):
        return len(self.populations)


def closed_classes(generator):
    """Closed communicating classes of the chain with rates generator[n, m] (m -> n)."""
    off = generator.copy()
    np.fill_diagonal(off, 0.0)
    adj = (off.T > 0).astype(np.int8)   # adj[m, n]: edge m -> n
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    leaves = np.ones(ncomp, dtype=bool)
    src, dst = np.nonzero(adj)
    leaving = labels[src] != labels[dst]
    leaves[labels[src[leaving]]] = False
    return [np.flatnonzero(labels == c) for c in np.flatnonzero(leaves)]


def _gth(generator):
    """Grassmann-Taksar-Heyman state reduction; subtraction-free, so small
    populations keep their relative accuracy."""
    q = generator.T.astype(float).copy()   # q[i, j]: rate i -> j
    np.fill_diagonal(q, 0.0)
    n = q.shape[0]
    for k in range(n - 1, 0, -1):
        s = q[k, :k].sum()
        if s <= 0.0:
            return None
        q[:k, k] /= s
        q[:k, :k] += np.outer(q[:k, k], q[k, :k])
    p = np.zeros(n)
    p[0] = 1.0
    for k in range(1, n):
        p[k] = p[:k] @ q[:k, k]
    return p / p.sum()


def _bordered(generator):
    """Null vector from W with the last row replaced by the normalization."""
    n = generator.shape[0]
    a = generator.astype(float).copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    q, r, perm = scipy.linalg.qr(a, pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[-1] <= 1e-14 * diag[0]:
        raise np.linalg.LinAlgError("bordered steady-state system is singular")
    y = scipy.linalg.solve_triangular(r, q.T @ b)
    p = np.empty(n)
    p[perm] = y
    return p


def solve_steady_state(rate_matrix, method="gth"):
    w = rate_matrix.generator
    scale = np.max(np.abs(w))
    if scale == 0.0:
        if w.shape[0] == 1:
            return SteadyState(populations=np.ones(1))
        raise DisconnectedStateSpace([[i] for i in range(w.shape[0])])
    blocks = closed_classes(w)
    if len(blocks) > 1:
        raise DisconnectedStateSpace(blocks)
    if method == "gth":
        p = _gth(w)
        if p is None:
            p = _bordered(w)
    elif method == "bordered":
        p = _bordered(w)
    else:
        raise ValueError(f"unknown steady-state method {method!r}")
    p = np.where(p < 0.0, 0.0, p)
    p = p / p.sum()
    residual = float(np.max(np.abs(w @ p)))
    if residual > 1e-10 * scale:
        raise np.linalg.LinAlgError(f"steady-state residual {residual:.3e} too large")
    return SteadyState(populations=p, residual=residual)


def evolve_populations(rate_matrix, p0, t):
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    p0 = np.asarray(getattr(p0, "populations", p0), dtype=float)
    if abs(p0.sum() - 1.0) > 1e-10:
        raise ValueError("initial populations are not normalized")
    if t == 0:
        return p0.copy()
    return scipy.linalg.expm(rate_matrix.generator * t) @ p0


def relaxation_time(rate_matrix):
    """1 / |second-smallest eigenvalue magnitude| of the generator."""
    ev = np.sort(np.abs(np.linalg.eigvals(rate_matrix.generator).real))
    return 1.0 / ev[1]

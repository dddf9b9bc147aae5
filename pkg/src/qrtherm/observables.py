"""Steady-state heat current and dressed two-photon correlations."""

from dataclasses import dataclass

import numpy as np

from . import fock
from .dme import SteadyState

G2_FLOOR = 1e-30


@dataclass(frozen=True)
class CurrentBreakdown:
    """Heat current into one bath; positive means energy flows into it.

    ``contributions`` lists (n, n', E_n - E_n', signed contribution) for
    every finite-gap pair with a nonzero term.
    """
    bath: str
    total: float
    alpha: float
    contributions: list

    @property
    def scaled(self):
        """J / (alpha * omega0)."""
        return self.total / self.alpha


def heat_current(eig, table, ss, bath_label="Q"):
    p = np.asarray(getattr(ss, "populations", ss), dtype=float)
    if len(p) != table.dim or len(eig.energies) != table.dim:
        raise ValueError("eigensystem, rate table and populations have mismatched dimensions")
    rates = table[bath_label]
    finite = table.finite
    net = rates.down * p[:, None] - rates.up * p[None, :]
    terms = np.where(finite, table.gaps * net, 0.0)
    rows, cols = np.nonzero(terms)
    contributions = [(int(n), int(m), float(table.gaps[n, m]), float(terms[n, m]))
                     for n, m in zip(rows, cols)]
    total = float(np.sum(terms))
    return CurrentBreakdown(bath=bath_label, total=total, alpha=rates.bath.alpha,
                            contributions=contributions)


def transition_dipoles(eig):
    """X[j, k] = <phi_j|(a^dagger + a)|phi_k>."""
    n_max = eig.params.n_max if eig.params is not None else eig.dim // fock.QUBIT_DIM - 1
    a = fock.annihilation(n_max)
    return eig.in_eigenbasis(fock.resonator_op(a + a.conj().T))


def x_minus_operator(eig):
    """Dressed lowering operator -i sum_{k>j} Delta_kj X_jk |j><k| in the eigenbasis."""
    x = transition_dipoles(eig)
    e = eig.energies
    delta = e[None, :] - e[:, None]          # delta[j, k] = E_k - E_j
    upper = np.triu(np.ones_like(delta, dtype=bool), k=1)
    return np.where(upper, -1j * delta * x, 0.0)


@dataclass(frozen=True)
class G2Result:
    value: float
    numerator: float
    denominator: float
    one_photon_weight: float
    defined: bool
    truncation_weight: float = 0.0

    @property
    def converged(self):
        return self.truncation_weight < 1e-6


def g2_zero(eig, ss, cut_fraction=0.2):
    p = np.asarray(getattr(ss, "populations", ss), dtype=float)
    xm = x_minus_operator(eig)
    xm2 = xm @ xm
    # ρ is diagonal: Tr[ρ X+X+X-X-] = Σ_k P_k ||X-X- φ_k||²
    two = np.sum(np.abs(xm2) ** 2, axis=0)
    one = np.sum(np.abs(xm) ** 2, axis=0)
    numerator = float(p @ two)
    weight = float(p @ one)
    denominator = weight ** 2
    cut = eig.truncation_cut(cut_fraction)
    top = float(p[cut:] @ two[cut:])
    trunc = top / numerator if numerator > 0 else 0.0
    if denominator <= G2_FLOOR:
        return G2Result(value=float("nan"), numerator=numerator, denominator=denominator,
                        one_photon_weight=weight, defined=False, truncation_weight=trunc)
    return G2Result(value=numerator / denominator, numerator=numerator,
                    denominator=denominator, one_photon_weight=weight, defined=True,
                    truncation_weight=trunc)


def ladder_coefficients(eig, n_levels=4):
    """A_n = sum_{l<n} (Delta_nl X_nl)^2 and B_n = sum_{p<l<n} (Delta_nl Delta_lp X_nl X_lp)^2."""
    x = np.abs(transition_dipoles(eig)[:n_levels, :n_levels])
    e = eig.energies[:n_levels]
    d = e[:, None] - e[None, :]
    a = np.zeros(n_levels)
    b = np.zeros(n_levels)
    for n in range(n_levels):
        for l in range(n):
            a[n] += (d[n, l] * x[n, l]) ** 2
            for q in range(l):
                b[n] += (d[n, l] * d[l, q] * x[n, l] * x[l, q]) ** 2
    return a, b


@dataclass(frozen=True)
class G2Approx:
    value: float
    a1: float
    b2: float
    precondition_ok: bool


def g2_approx(eig, ss):
    """Low-temperature estimate P2 B2 / (P1 A1)^2."""
    p = np.asarray(getattr(ss, "populations", ss), dtype=float)
    a, b = ladder_coefficients(eig, n_levels=3)
    ok = bool(p[1] < 0.2 * p[0])
    denom = (p[1] * a[1]) ** 2
    if p[2] == 0.0:
        value = 0.0
    elif denom <= G2_FLOOR:
        value = float("nan")
    else:
        value = float(p[2] * b[2] / denom)
    return G2Approx(value=value, a1=float(a[1]), b2=float(b[2]), precondition_ok=ok)


def gibbs_populations(eig, temperature):
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    e = eig.energies
    w = np.exp(-(e - e.min()) / temperature)
    return SteadyState(populations=w / w.sum())

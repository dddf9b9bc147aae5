"""Closed-form weak-coupling results used as independent checks.

All expressions take energies in units of omega0 and return currents in
the same units as :func:`qrtherm.observables.heat_current`.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dme import ohmic_density


@dataclass(frozen=True)
class WeakCouplingCurrent:
    total: float
    prefactor: float
    components: dict = field(default_factory=dict)
    flags: tuple = ()


def _occ(omega, temperature):
    """Bose occupation that also accepts omega <= 0 via n(-w) = -1 - n(w)."""
    if temperature == 0:
        return 0.0 if omega > 0 else -1.0
    if omega == 0:
        return math.inf
    return 1.0 / math.expm1(omega / temperature)


def _bracket(n_r, n_q):
    """n_R (1 + n_Q) - (1 + n_R) n_Q, which reduces to n_R - n_Q."""
    return n_r - n_q


def _check_bias(params, name):
    if abs(params.epsilon - params.omega0) < 10 * params.lam:
        warnings.warn(f"{name}: |epsilon - omega0| < 10 lambda, outside the perturbative regime",
                      RuntimeWarning, stacklevel=3)


def jx_weak(params, bath_r, bath_q):
    """Cotunneling current into the Q bath for transverse coupling."""
    eps, w0, lam = params.epsilon, params.omega0, params.lam
    if eps == w0:
        raise ValueError("jx_weak is singular at epsilon == omega0")
    _check_bias(params, "jx_weak")
    t_r, t_q = bath_r.temperature, bath_q.temperature
    n_r0, n_q0 = _occ(w0, t_r), _occ(w0, t_q)
    n_re, n_qe = _occ(eps, t_r), _occ(eps, t_q)
    i1 = ohmic_density(w0, bath_q) * _bracket(n_r0, n_q0)
    i2 = ohmic_density(eps, bath_r) / (2 * n_qe + 1) * _bracket(n_re, n_qe)
    pref = (lam / (eps - w0)) ** 2
    return WeakCouplingCurrent(total=pref * (w0 * i1 + eps * i2), prefactor=pref,
                               components={"I_x1": i1, "I_x2": i2})


def _heaviside(x):
    return 1.0 if x >= 0 else 0.0


def _gamma_abs(omega, bath):
    return ohmic_density(abs(omega), bath)


def jz_weak(params, bath_r, bath_q):
    """Cyclic-flux current into the Q bath for longitudinal coupling."""
    eps, w0, lam = params.epsilon, params.omega0, params.lam
    _check_bias(params, "jz_weak")
    t_r, t_q = bath_r.temperature, bath_q.temperature
    flags = ()
    n_q = _occ(eps, t_q)
    n_r = _occ(w0, t_r)
    norm = 1.0 / (2 * n_q + 1)

    def kappa_pair(omega):
        # gamma(w) n(w) and gamma(w)(1 + n(w)); at w == 0 both take the limit pi alpha T
        if omega == 0:
            lim = np.pi * bath_q.alpha * t_q
            return lim, lim
        occ = _occ(omega, t_q)
        g = _gamma_abs(omega, bath_q)
        return g * occ, g * (1 + occ)

    if eps == w0:
        flags = ("resonant-edge",)

    up, dn = kappa_pair(eps + w0)
    i1 = _heaviside(eps + w0) * norm * (dn * n_q * n_r - up * (1 + n_q) * (1 + n_r))

    if eps == w0:
        up, dn = kappa_pair(0.0)
    else:
        g = _gamma_abs(eps - w0, bath_q)
        occ = _occ(eps - w0, t_q)
        up, dn = g * occ, g * (1 + occ)
    i2 = _heaviside(eps - w0) * norm * (up * (1 + n_q) * n_r - dn * n_q * (1 + n_r))

    if eps == w0:
        up, dn = kappa_pair(0.0)
    else:
        g = _gamma_abs(w0 - eps, bath_q)
        occ = _occ(w0 - eps, t_q)
        up, dn = g * occ, g * (1 + occ)
    i3 = _heaviside(w0 - eps) * norm * (dn * (1 + n_q) * n_r - up * n_q * (1 + n_r))

    pref = (2 * lam / w0) ** 2
    return WeakCouplingCurrent(total=pref * w0 * (i1 + i2 + i3), prefactor=pref,
                               components={"I_z1": i1, "I_z2": i2, "I_z3": i3}, flags=flags)


def _log_fact(n):
    return math.lgamma(n + 1)


def sigma_x_overlap_exact(n, n_prime, g):
    """Overlap <phi^up_n|sigma_x|phi^down_n'> between oppositely displaced Fock states.

    Closed form with the (-1)^(n+l) sign convention; it equals
    <n| exp[2g (a - a^dagger)] |n'>; terms are summed smallest first.
    """
    if n < 0 or n_prime < 0:
        raise ValueError("Fock indices must be non-negative")
    x = 2.0 * g
    if x == 0.0:
        return 1.0 if n == n_prime else 0.0
    half = 0.5 * (_log_fact(n) + _log_fact(n_prime)) - 2.0 * g * g
    sign_x = -1.0 if x < 0 else 1.0
    log_x = math.log(abs(x))
    terms = []
    for l in range(min(n, n_prime) + 1):
        power = n + n_prime - 2 * l
        log_mag = half + power * log_x - _log_fact(n - l) - _log_fact(n_prime - l) - _log_fact(l)
        sign = (-1.0) ** (n + l) * sign_x ** power
        terms.append(sign * math.exp(log_mag))
    terms.sort(key=abs)
    value = math.fsum(terms)
    return 0.0 if abs(value) < 1e-14 else value


def sigma_x_overlap_second_order(n, n_prime, g):
    """Small-displacement expansion of the sigma_x overlap through (2g)^2.

    Carries an overall (-1)^n relative to :func:`sigma_x_overlap_exact`.
    """
    x = 2.0 * g
    d = n - n_prime
    if d == 0:
        val = 1.0 - (n + 0.5) * x ** 2
    elif d == -1:
        val = x * math.sqrt(n + 1)
    elif d == 1:
        val = -x * math.sqrt(n)
    elif d == 2:
        val = 0.5 * x ** 2 * math.sqrt(n * (n - 1))
    elif d == -2:
        val = 0.5 * x ** 2 * math.sqrt((n + 1) * (n + 2))
    else:
        val = 0.0
    return (-1.0) ** n * val


@dataclass(frozen=True)
class PopulationTable:
    """Zeroth-order populations keyed by (n, branch).

    theta0 uses branches '+' (|n, up>) and '-' (|n+1, down>), with the ground
    state |0, down> stored as (-1, '-'). theta90 uses 'up' and 'down' with
    n the photon number in the displaced frame.
    """
    limit: str
    entries: dict
    flags: tuple = ()

    def total(self):
        return math.fsum(self.entries.values())


def zeroth_populations(params, bath_r, bath_q, limit):
    if limit not in ("theta0", "theta90"):
        raise ValueError(f"limit must be 'theta0' or 'theta90', got {limit!r}")
    eps, w0, n_max = params.epsilon, params.omega0, params.n_max
    t_r, t_q = bath_r.temperature, bath_q.temperature
    flags = ()
    # qubit weights e^{-beta_Q eps}/(1 + e^{-beta_Q eps}) written to stay finite at T_Q -> 0
    if t_q == 0:
        p_up, p_down = 0.0, 1.0
        flags = ("T_Q=0 limit",)
    else:
        p_up = 1.0 / (math.exp(eps / t_q) + 1.0) if eps / t_q < 700 else 0.0
        p_down = 1.0 - p_up
    if t_r == 0:
        ladder = np.zeros(n_max + 1)
        ladder[0] = 1.0
    else:
        x = math.exp(-w0 / t_r)
        ladder = (1.0 - x) * x ** np.arange(n_max + 1)
    ladder = ladder / ladder.sum()
    entries = {}
    if limit == "theta0":
        for n in range(n_max + 1):
            entries[(n, "+")] = p_up * ladder[n]
        for n in range(-1, n_max):
            entries[(n, "-")] = p_down * ladder[n + 1]
    else:
        for n in range(n_max + 1):
            entries[(n, "up")] = p_up * ladder[n]
            entries[(n, "down")] = p_down * ladder[n]
    return PopulationTable(limit=limit, entries=entries, flags=flags)

"""Single-parameter-point pipeline and the Fock-truncation convergence scan."""

import math
from dataclasses import dataclass

import numpy as np

from . import dme, observables
from .spectrum import solve

NMAX_START = 10
NMAX_STEP = 5
NMAX_CAP = 60
DEFAULT_TOL = 1e-3


class TruncationNotConverged(RuntimeError):
    def __init__(self, n_max, previous, last):
        self.n_max = n_max
        self.previous = previous
        self.last = last
        super().__init__(
            f"observables not converged by n_max={n_max}: "
            f"previous={previous}, last={last}")


@dataclass
class PointResult:
    params: object
    bath_r: object
    bath_q: object
    eig: object
    table: object
    steady: object
    current_q: object
    current_r: object
    g2: object = None
    g2_approx: object = None

    @property
    def top_population(self):
        """Total steady-state weight in the top 20% of the truncated spectrum."""
        cut = self.eig.truncation_cut()
        return float(self.steady.populations[cut:].sum())

    def observables(self):
        g2 = self.g2.value if self.g2 is not None and self.g2.defined else None
        return (self.current_q.total, g2)


def evaluate_point(params, bath_r, bath_q, g2=True):
    eig = solve(params)
    table = dme.transition_rates(eig, [bath_r, bath_q])
    steady = dme.solve_steady_state(dme.build_rate_matrix(table))
    res = PointResult(
        params=params, bath_r=bath_r, bath_q=bath_q, eig=eig, table=table, steady=steady,
        current_q=observables.heat_current(eig, table, steady, "Q"),
        current_r=observables.heat_current(eig, table, steady, "R"),
    )
    if g2:
        res.g2 = observables.g2_zero(eig, steady)
        res.g2_approx = observables.g2_approx(eig, steady)
    return res


def _close(a, b, tol, floor):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= tol * max(abs(a), abs(b), floor)


def _agree(old, new, tol, alpha):
    j_old, g_old = old.observables()
    j_new, g_new = new.observables()
    if old.g2 is not None and not old.g2.converged:
        return False
    # equilibrium currents are rounding noise around zero
    return _close(j_old, j_new, tol, 1e-10 * alpha) and _close(g_old, g_new, tol, 1e-12)


def converge_truncation(params, observable_tol=DEFAULT_TOL, bath_r=None, bath_q=None,
                        g2=True, return_result=False):
    """Smallest n_max (10, 15, ..., 60) whose observables move by less than
    ``observable_tol`` (relative) when n_max grows by 5."""
    if not observable_tol > 0:
        raise ValueError("observable_tol must be positive")
    bath_r = bath_r or dme.BathSpec("R")
    bath_q = bath_q or dme.BathSpec("Q")
    if math.isinf(observable_tol):
        if return_result:
            return NMAX_START, evaluate_point(params.replace(n_max=NMAX_START), bath_r, bath_q, g2)
        return NMAX_START
    n = NMAX_START
    prev = evaluate_point(params.replace(n_max=n), bath_r, bath_q, g2)
    before = prev
    while n + NMAX_STEP <= NMAX_CAP:
        nxt = evaluate_point(params.replace(n_max=n + NMAX_STEP), bath_r, bath_q, g2)
        if _agree(prev, nxt, observable_tol, bath_q.alpha):
            return (n, prev) if return_result else n
        n += NMAX_STEP
        before, prev = prev, nxt
    raise TruncationNotConverged(NMAX_CAP, _summary(before), _summary(prev))


def _summary(res):
    j, g = res.observables()
    return {"J": j, "g2": g}


def temperatures(t_mean, d_t):
    """Bath temperatures (T_R, T_Q) = (T_mean + dT/2, T_mean - dT/2)."""
    return t_mean + 0.5 * d_t, t_mean - 0.5 * d_t


def spectrum_summary(res, levels=4):
    """Lowest energies, populations and ladder coefficients A_1, B_2."""
    a, b = observables.ladder_coefficients(res.eig, n_levels=3)
    return {
        "energies": np.asarray(res.eig.energies[:levels]),
        "populations": np.asarray(res.steady.populations[:levels]),
        "A1": float(a[1]),
        "B2": float(b[2]),
    }

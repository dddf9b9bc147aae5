import math

import numpy as np
import pytest

from qrtherm import dme
from qrtherm.dme import SteadyState, build_rate_matrix, solve_steady_state, transition_rates
from qrtherm.observables import (g2_approx, g2_zero, gibbs_populations, heat_current,
                                 ladder_coefficients, transition_dipoles, x_minus_operator)
from qrtherm.oracles import jx_weak
from qrtherm.spectrum import EigenSystem, ModelParams, longitudinal_solution, solve

from conftest import baths


def _point(theta, lam, t_r, t_q, n_max=25, eps=1.5):
    p = ModelParams(epsilon=eps, lam=lam, theta=theta, n_max=n_max)
    eig = solve(p)
    table = transition_rates(eig, list(baths(t_r, t_q)))
    ss = solve_steady_state(build_rate_matrix(table))
    return eig, table, ss


@pytest.mark.parametrize("theta,lam", [(0.0, 0.2), (0.7, 1.0), (math.pi / 2, 1.5)])
def test_equilibrium_current_vanishes(theta, lam):
    eig, table, ss = _point(theta, lam, 0.8, 0.8)
    for label in ("R", "Q"):
        assert abs(heat_current(eig, table, ss, label).total) <= 1e-12 * 0.001


def test_decoupled_current_vanishes():
    eig, table, ss = _point(0.4, 0.0, 1.5, 0.5, n_max=12)
    # nonzero only through rounding of the steady-state populations
    assert abs(heat_current(eig, table, ss, "Q").total) <= 1e-15 * 0.001


def test_current_matches_transverse_oracle():
    eig, table, ss = _point(0.0, 0.01, 1.5, 0.5, n_max=30)
    j = heat_current(eig, table, ss, "Q")
    ref = jx_weak(ModelParams(lam=0.01), *baths(1.5, 0.5))
    assert j.total > 0
    assert j.total == pytest.approx(ref.total, rel=0.05)


def test_breakdown_sums_and_scaling():
    eig, table, ss = _point(0.6, 0.9, 2.0, 0.3)
    j = heat_current(eig, table, ss, "Q")
    assert j.total == pytest.approx(math.fsum(c[3] for c in j.contributions), rel=1e-12)
    assert j.scaled == pytest.approx(j.total / 0.001)
    for n, m, gap, _ in j.contributions:
        assert gap > 0 and eig.energies[n] > eig.energies[m]


def test_dimension_mismatch_rejected():
    eig, table, ss = _point(0.6, 0.9, 2.0, 0.3, n_max=8)
    with pytest.raises(ValueError):
        heat_current(eig, table, SteadyState(ss.populations[:-1]), "Q")


@pytest.mark.parametrize("theta,lam,t_r,t_q", [
    (0.0, 0.05, 1.5, 0.5), (0.5, 0.8, 0.4, 1.6), (1.2, 1.5, 2.0, 0.0), (math.pi / 2, 0.3, 1.0, 0.2),
])
def test_conservation_and_second_law(theta, lam, t_r, t_q):
    eig, table, ss = _point(theta, lam, t_r, t_q)
    jq = heat_current(eig, table, ss, "Q").total
    jr = heat_current(eig, table, ss, "R").total
    assert abs(jq + jr) <= 1e-10 * 0.001
    cold_in = jq if t_q < t_r else jr
    assert cold_in >= -1e-12


def test_x_minus_structure():
    eig = solve(ModelParams(lam=0.7, theta=0.5, n_max=15))
    xm = x_minus_operator(eig)
    assert np.allclose(np.tril(xm), 0.0)
    xm2 = xm @ xm
    assert np.all(xm2[:, 0] == 0)
    psd = xm.conj().T @ xm
    assert np.linalg.eigvalsh(psd).min() >= -1e-10 * np.abs(psd).max()


def test_x_minus_bare_limit():
    eig = solve(ModelParams(lam=0.0, n_max=10))
    x = np.abs(transition_dipoles(eig))
    xm = np.abs(x_minus_operator(eig))
    nonzero = np.argwhere(xm > 1e-12)
    for j, k in nonzero:
        assert eig.energies[k] - eig.energies[j] == pytest.approx(1.0, abs=1e-12)
        assert xm[j, k] == pytest.approx(x[j, k])


def test_g2_rephasing_invariance(rng):
    eig, table, ss = _point(0.8, 1.0, 0.3, 0.3, n_max=15)
    ref = g2_zero(eig, ss)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=eig.dim))
    rephased = EigenSystem(energies=eig.energies, vectors=eig.vectors * phases, params=eig.params)
    out = g2_zero(rephased, ss)
    assert out.value == pytest.approx(ref.value, rel=1e-12)
    assert out.one_photon_weight == pytest.approx(ref.one_photon_weight, rel=1e-12)


@pytest.mark.parametrize("temp", [0.2, 0.5, 1.0])
def test_thermal_resonator_is_chaotic(temp):
    eig = solve(ModelParams(lam=0.0, n_max=40))
    res = g2_zero(eig, gibbs_populations(eig, temp))
    assert res.defined
    assert res.value == pytest.approx(2.0, abs=1e-6)


def test_ground_state_only_is_undefined():
    eig = solve(ModelParams(lam=0.5, n_max=10))
    p = np.zeros(eig.dim)
    p[0] = 1.0
    res = g2_zero(eig, SteadyState(p))
    assert not res.defined
    assert math.isnan(res.value)
    assert res.numerator == 0.0 and res.one_photon_weight == 0.0


def test_g2_fields_consistent():
    eig, table, ss = _point(0.3, 1.0, 0.5, 0.5)
    res = g2_zero(eig, ss)
    assert res.value >= 0
    assert res.denominator == pytest.approx(res.one_photon_weight ** 2)
    assert res.value == pytest.approx(res.numerator / res.denominator)
    assert res.converged


def test_ladder_coefficients_bare_limit():
    # lam = 0, eps > 2: lowest three levels are |0,down>, |1,down>, |2,down>
    eig = solve(ModelParams(epsilon=3.5, lam=0.0, n_max=10))
    a, b = ladder_coefficients(eig, n_levels=3)
    assert a[0] == 0.0 and b[1] == 0.0
    assert a[1] == pytest.approx(1.0)
    assert a[2] == pytest.approx(2.0)
    assert b[2] == pytest.approx(2.0)


def test_g2_approx_zero_when_no_two_photon_weight():
    eig = solve(ModelParams(lam=1.0, n_max=10))
    p = np.zeros(eig.dim)
    p[:2] = [0.95, 0.05]
    res = g2_approx(eig, SteadyState(p))
    assert res.value == 0.0
    assert res.precondition_ok


def test_g2_approx_precondition_flag():
    eig = solve(ModelParams(lam=1.0, n_max=10))
    p = np.zeros(eig.dim)
    p[:3] = [0.5, 0.3, 0.2]
    res = g2_approx(eig, SteadyState(p))
    assert not res.precondition_ok
    assert res.value > 0


def test_g2_approx_antibunching_agrees_in_sign():
    for theta in np.linspace(0, 0.4 * math.pi, 9):
        eig, table, ss = _point(theta, 1.0, 0.1, 0.1, n_max=30)
        full = g2_zero(eig, ss).value
        approx = g2_approx(eig, ss).value
        if full < 1:
            assert approx < 1


def test_gibbs_basic_properties():
    eig = solve(ModelParams(lam=0.5, theta=0.3, n_max=10))
    g = gibbs_populations(eig, 0.7).populations
    assert g.sum() == pytest.approx(1.0)
    e = eig.energies
    assert g[1] / g[0] == pytest.approx(math.exp(-(e[1] - e[0]) / 0.7))
    hot = gibbs_populations(eig, 1e4).populations
    assert hot.max() - hot.min() < 1e-3
    with pytest.raises(ValueError):
        gibbs_populations(eig, 0.0)


def test_gibbs_longitudinal_product_form():
    # displaced thermal resonator times thermal qubit
    p = ModelParams(epsilon=1.5, lam=0.8, theta=math.pi / 2, n_max=40)
    eig = solve(p)
    temp = 0.6
    sol = longitudinal_solution(p)
    photon = np.exp(-sol.n / temp)
    qubit = np.array([math.exp(-0.75 / temp), math.exp(0.75 / temp)])
    product = np.concatenate([qubit[0] * photon, qubit[1] * photon])
    levels = np.concatenate([sol.e_up, sol.e_down])
    order = np.argsort(levels)
    product = product[order] / product.sum()
    g = gibbs_populations(eig, temp).populations
    keep = 20
    np.testing.assert_allclose(eig.energies[:keep], levels[order][:keep], atol=1e-8)
    np.testing.assert_allclose(g[:keep], product[:keep], rtol=1e-7)

import math
import warnings

import numpy as np
import pytest
from scipy.special import eval_laguerre

from qrtherm import fock
from qrtherm.dme import bose_occupation, ohmic_density
from qrtherm.oracles import (_bracket, _occ, jx_weak, jz_weak, sigma_x_overlap_exact,
                             sigma_x_overlap_second_order, zeroth_populations)
from qrtherm.point import evaluate_point
from qrtherm.spectrum import ModelParams

from conftest import baths

TEMPS = [0.1, 0.3, 0.7, 1.0, 2.0, 5.0]


@pytest.mark.parametrize("temp", TEMPS)
def test_zero_bias_currents_vanish(temp):
    for fn in (jx_weak, jz_weak):
        res = fn(ModelParams(lam=0.01), *baths(temp, temp))
        assert all(abs(v) <= 1e-15 * max(1.0, abs(v)) for v in res.components.values())
        assert abs(res.total) <= 1e-18


def test_zero_coupling_currents_vanish():
    for fn in (jx_weak, jz_weak):
        assert fn(ModelParams(lam=0.0), *baths(1.5, 0.5)).total == 0.0


@pytest.mark.parametrize("t_r,t_q", [(1.5, 0.5), (0.2, 2.0), (3.0, 0.01)])
def test_bracket_antisymmetry(t_r, t_q):
    for w in (1.0, 1.5):
        a, b = _occ(w, t_r), _occ(w, t_q)
        forward = a * (1 + b) - (1 + a) * b
        assert _bracket(a, b) == pytest.approx(forward, rel=1e-12)
        assert _bracket(a, b) == -_bracket(b, a)


def test_total_is_prefactor_times_components():
    p = ModelParams(lam=0.02)
    br, bq = baths(1.7, 0.4)
    jx = jx_weak(p, br, bq)
    c = jx.components
    assert jx.total == pytest.approx(jx.prefactor * (c["I_x1"] + 1.5 * c["I_x2"]), rel=1e-12)
    jz = jz_weak(p, br, bq)
    assert jz.total == pytest.approx(jz.prefactor * sum(jz.components.values()), rel=1e-12)
    assert jz.prefactor == pytest.approx((2 * 0.02) ** 2)
    assert jz.components["I_z3"] == 0.0


def test_transverse_large_bias_limit():
    p = ModelParams(lam=0.01)
    br, bq = baths(2.0, 0.0)
    res = jx_weak(p, br, bq)
    ref = (0.01 / 0.5) ** 2 * (ohmic_density(1.0, bq) * bose_occupation(1.0, 2.0)
                               + 1.5 * ohmic_density(1.5, br) * bose_occupation(1.5, 2.0))
    assert res.total == pytest.approx(ref, rel=1e-12)


def test_transverse_singular_and_warning():
    with pytest.raises(ValueError):
        jx_weak(ModelParams(epsilon=1.0, lam=0.01), *baths(1.5, 0.5))
    with pytest.warns(RuntimeWarning):
        jx_weak(ModelParams(epsilon=1.05, lam=0.01), *baths(1.5, 0.5))


def test_longitudinal_collapse_cold_qubit_bath():
    res = jz_weak(ModelParams(lam=0.01), *baths(2.0, 0.0))
    assert res.components["I_z1"] == 0.0
    assert res.components["I_z2"] == 0.0
    near = jz_weak(ModelParams(lam=0.01), *baths(2.0, 0.02))
    assert abs(near.components["I_z1"]) < 1e-12 and abs(near.components["I_z2"]) < 1e-12


def test_longitudinal_gating_below_resonance():
    res = jz_weak(ModelParams(epsilon=0.5, lam=0.01), *baths(1.5, 0.5))
    assert res.components["I_z2"] == 0.0
    assert res.components["I_z3"] != 0.0


def test_longitudinal_resonant_edge_flagged():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = jz_weak(ModelParams(epsilon=1.0, lam=0.01), *baths(1.5, 0.5))
    assert "resonant-edge" in res.flags
    assert math.isfinite(res.total)


@pytest.mark.parametrize("theta,fn", [(0.0, jx_weak), (math.pi / 2, jz_weak)])
def test_weak_currents_match_numeric(theta, fn):
    p = ModelParams(lam=0.01, theta=theta, n_max=30)
    br, bq = baths(1.5, 0.5)
    numeric = evaluate_point(p, br, bq, g2=False).current_q.total
    assert numeric == pytest.approx(fn(p, br, bq).total, rel=0.05)


def test_overlap_examples():
    assert sigma_x_overlap_exact(0, 1, 0.05) == pytest.approx(0.1 * math.exp(-0.005), rel=1e-12)
    assert sigma_x_overlap_exact(0, 1, 0.05) == pytest.approx(0.0995, abs=5e-5)
    assert sigma_x_overlap_second_order(2, 0, 0.1) == pytest.approx(0.5 * 0.04 * math.sqrt(2))
    assert sigma_x_overlap_second_order(2, 0, 0.1) == pytest.approx(0.028284, abs=1e-6)


@pytest.mark.parametrize("n", range(6))
def test_overlaps_at_zero_displacement(n):
    for m in range(6):
        assert sigma_x_overlap_exact(n, m, 0.0) == (1.0 if n == m else 0.0)
        assert sigma_x_overlap_second_order(n, m, 0.0) == ((-1.0) ** n if n == m else 0.0)


def test_overlap_matches_displacement_matrix():
    n_max = 90
    for g in (0.05, 0.3, 0.8, 1.5):
        d = fock.displacement(n_max, 2 * g)
        for n in range(11):
            for m in range(11):
                assert sigma_x_overlap_exact(n, m, g) == pytest.approx(d[n, m], abs=1e-8)


@pytest.mark.parametrize("n", range(11))
def test_overlap_diagonal_is_laguerre(n):
    for g in (0.1, 0.4, 1.0):
        ref = math.exp(-2 * g * g) * eval_laguerre(n, 4 * g * g)
        assert sigma_x_overlap_exact(n, n, g) == pytest.approx(ref, abs=1e-12)


def _expansion_error(n, m, g):
    return abs((-1.0) ** n * sigma_x_overlap_second_order(n, m, g) - sigma_x_overlap_exact(n, m, g))


def test_second_order_error_is_cubic():
    # the third-order coefficient grows like (n + 1)^{3/2}
    for g in np.linspace(0.005, 0.1, 8):
        for n in range(6):
            for m in range(6):
                bound = 10 * g ** 3 * (max(n, m) + 1) ** 1.5
                assert _expansion_error(n, m, g) < bound
    assert max(_expansion_error(n, m, 0.1) for n in range(2) for m in range(2)) < 10 * 0.1 ** 3


@pytest.mark.parametrize("n,m", [(0, 1), (1, 2), (5, 4), (2, 5)])
def test_second_order_error_scaling(n, m):
    ratio = _expansion_error(n, m, 0.02) / _expansion_error(n, m, 0.01)
    assert ratio == pytest.approx(8.0, rel=0.05)


def test_overlap_rejects_negative_index():
    with pytest.raises(ValueError):
        sigma_x_overlap_exact(-1, 0, 0.1)


@pytest.mark.parametrize("limit", ["theta0", "theta90"])
def test_zeroth_populations_normalized(limit):
    table = zeroth_populations(ModelParams(n_max=30), *baths(1.5, 0.5), limit)
    assert table.total() == pytest.approx(1.0, abs=1e-12)
    assert all(v >= 0 for v in table.entries.values())


def test_zeroth_populations_equal_temperature_is_gibbs():
    temp = 0.8
    table = zeroth_populations(ModelParams(n_max=40), *baths(temp, temp), "theta90")
    e0 = table.entries[(0, "down")]
    for (n, branch), p in table.entries.items():
        energy = n + (0.75 if branch == "up" else -0.75)
        assert p == pytest.approx(e0 * math.exp(-(energy + 0.75) / temp), rel=1e-12)


def test_zeroth_populations_cold_qubit_bath():
    table = zeroth_populations(ModelParams(n_max=20), *baths(1.0, 0.0), "theta0")
    assert "T_Q=0 limit" in table.flags
    assert all(p == 0.0 for (n, b), p in table.entries.items() if b == "+")
    assert table.total() == pytest.approx(1.0)


def test_zeroth_populations_bad_limit():
    with pytest.raises(ValueError):
        zeroth_populations(ModelParams(), *baths(1.0, 1.0), "theta45")


def test_zeroth_populations_match_numeric():
    p = ModelParams(lam=0.01, theta=0.0, n_max=30)
    br, bq = baths(1.5, 0.5)
    res = evaluate_point(p, br, bq, g2=False)
    table = zeroth_populations(p, br, bq, "theta0")
    vecs = res.eig.vectors
    checked = 0
    for (n, branch), pop in table.entries.items():
        if pop <= 1e-6:
            continue
        photons, qubit = (n, 0) if branch == "+" else (n + 1, 1)
        k = int(np.argmax(np.abs(vecs[fock.basis_index(photons, qubit, p.n_max)])))
        assert res.steady.populations[k] == pytest.approx(pop, rel=0.01)
        checked += 1
    assert checked > 20

import math

import numpy as np
import pytest

from pt_trimer.dynamics import (OSCILLATION, POWER_LAW, POWER_LAW_OSCILLATION, UNCHANGED,
                                chi_factor, fit_probability_polynomial, growth_order,
                                initial_state, propagate_analytic, propagate_numeric,
                                reduced_order_condition)
from pt_trimer.errors import NotAtEP, OscillationPresent, StepTooLarge
from pt_trimer.linalg import eig3
from pt_trimer.models import TrimerParams, build_hamiltonian
from pt_trimer.spectral import critical_gamma_ep2

SQRT2, SQRT3 = math.sqrt(2.0), math.sqrt(3.0)
CHAIN_EP3 = TrimerParams.chain(1.0, SQRT2)
RING_EP3 = TrimerParams.ring(1.0, 0.5, 1.5, math.pi / 2)
RING_EP2 = TrimerParams.ring(0.5, 1.0, SQRT3 / 2, -math.pi / 3)
TIMES = np.linspace(0, 10, 201)


def poly(coeffs, t):
    return np.polynomial.polynomial.polyval(t, coeffs)


REFERENCE_CASES = [
    (CHAIN_EP3, [1, 0, 0], (1, 2 * SQRT2, 4, 2 * SQRT2, 1)),
    (CHAIN_EP3, np.array([1, 0, 1]) / SQRT2, (1, 0, 4)),
    (RING_EP3, [1, 0, 0], (1, 3, 4.5, 3, 1.5)),
    (RING_EP3, [0, 1, 0], (1, 0, 0, 0, 1.5)),
    (TrimerParams.ring(1.0, 0.5, 1.5, math.pi / 2), np.array([1, 0, 1]) / SQRT2, (1, 0, 3)),
]


@pytest.mark.parametrize("params,psi0,coeffs", REFERENCE_CASES)
def test_analytic_polynomials(params, psi0, coeffs):
    res = propagate_analytic(params, psi0, TIMES)
    assert np.max(np.abs(res.probability / poly(coeffs, TIMES) - 1)) <= 1e-9
    assert np.allclose(res.probability, np.sum(np.abs(res.states) ** 2, axis=1))


def test_ep2_oscillation_closed_form():
    res = propagate_analytic(RING_EP2, np.ones(3) / SQRT3, TIMES)
    assert np.max(np.abs(res.probability - (25 - 16 * np.cos(1.5 * TIMES)) / 9)) <= 1e-8


def test_eigenstate_is_stationary():
    params = TrimerParams.ring(1.0, 0.5, 0.3, 0.4)
    decomp = eig3(build_hamiltonian(params))
    for v in decomp.eigenvectors:
        res = propagate_analytic(params, v, TIMES)
        assert np.max(np.abs(res.probability - 1)) <= 1e-10


def fuzz_corpus():
    yield CHAIN_EP3
    yield RING_EP3
    yield RING_EP2
    yield TrimerParams.ring(0.5, 1.0, SQRT3 / 2, math.pi / 3)
    rng = np.random.default_rng(21)
    for _ in range(6):
        kappa, j = rng.uniform(0.3, 1.5, 2)
        phi = rng.uniform(0, 2 * math.pi)
        yield TrimerParams.ring(kappa, j, rng.uniform(0, 0.5), phi)     # mostly exact
        yield TrimerParams.ring(kappa, j, rng.uniform(2.5, 3.0), phi)   # broken
        yield TrimerParams.ring(kappa, j, critical_gamma_ep2(kappa, j, phi), phi)


@pytest.mark.parametrize("params", list(fuzz_corpus()))
def test_analytic_vs_numeric_oracle(params):
    rng = np.random.default_rng(22)
    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi0 /= np.linalg.norm(psi0)
    H = build_hamiltonian(params)
    t_end = 20.0 / params.kappa
    growth = max(np.max(np.abs(np.linalg.eigvals(H).imag)), 0)
    if growth * t_end > 20:
        t_end = 20 / growth     # keep broken-phase amplitudes O(e^20) at most
    num = propagate_numeric(H, psi0, t_end, record_every=500)
    ana = propagate_analytic(params, psi0, num.times)
    scale = np.maximum(1.0, np.linalg.norm(ana.states, axis=1))
    assert np.max(np.abs(num.states - ana.states) / scale[:, None]) <= 1e-6


def test_numeric_basics():
    res = propagate_numeric(np.zeros((3, 3)), [1, 2, 3], 1.0)
    assert np.allclose(res.states[-1], [1, 2, 3])
    H = build_hamiltonian(TrimerParams.ring(1.0, 0.6, 0.0, 0.7))
    res = propagate_numeric(H, [1, 0, 0], 100.0, record_every=10_000)
    assert np.max(np.abs(res.probability - 1)) <= 1e-9
    with pytest.raises(StepTooLarge):
        propagate_numeric(H, [1, 0, 0], 1.0, dt=1.0)
    with pytest.raises(ValueError):
        propagate_numeric(H, [1, 0, 0], 1.0, dt=-1e-3)
    with pytest.raises(ValueError):
        initial_state([0, 0, 0])


def test_chi_factor():
    assert math.isclose(chi_factor(1.0, 0.5), 1.5)
    assert math.isclose(chi_factor(0.0, 0.8), 1.0)
    assert math.isclose(chi_factor(1.0, 1.0), (3 + SQRT3) / (2 + SQRT3))


@pytest.mark.parametrize("params,psi0,order,behavior", [
    (CHAIN_EP3, [1, 0, 0], 4, POWER_LAW),
    (CHAIN_EP3, np.array([1, 0, 1]) / SQRT2, 2, POWER_LAW),
    (RING_EP2, [1, 0, 0], 2, POWER_LAW_OSCILLATION),
    (RING_EP2, np.array([1, -1, 0]) / SQRT2, 2, POWER_LAW),
    (RING_EP2, np.ones(3) / SQRT3, 0, OSCILLATION),
    (TrimerParams.ring(0.5, 1.0, SQRT3 / 2, math.pi / 3), np.array([1, 0, 1]) / SQRT2, 0, UNCHANGED),
])
def test_growth_order_cases(params, psi0, order, behavior):
    report = growth_order(params, psi0)
    assert (report.order, report.behavior) == (order, behavior)


def test_oscillation_period():
    report = growth_order(RING_EP2, np.ones(3) / SQRT3)
    assert math.isclose(report.period, 4 * math.pi / 3, rel_tol=1e-12)
    a = propagate_analytic(RING_EP2, np.ones(3) / SQRT3, TIMES)
    b = propagate_analytic(RING_EP2, np.ones(3) / SQRT3, TIMES + report.period)
    assert np.max(np.abs(a.probability - b.probability)) <= 1e-8


def test_fig6d_site_balance():
    res = propagate_analytic(TrimerParams.ring(0.5, 1.0, SQRT3 / 2, math.pi / 3),
                             np.array([1, 0, 1]) / SQRT2, TIMES)
    site = np.abs(res.states) ** 2
    assert np.max(np.abs(res.probability - 1)) <= 1e-8
    assert np.max(np.abs(site[:, 0] - site[:, 2])) <= 1e-8


def test_growth_order_not_at_ep():
    with pytest.raises(NotAtEP):
        growth_order(TrimerParams.chain(1.0, 1.0), [1, 0, 0])


@pytest.mark.parametrize("params,expected", [
    (CHAIN_EP3, (1, 1j * SQRT2, -1)),
    (RING_EP3, (1, 1j, -1)),
    (TrimerParams.ring(1.0, 0.5, 1.5, -math.pi / 2), (1, 2j, -1)),
])
def test_reduced_order_condition(params, expected):
    assert np.allclose(reduced_order_condition(params), expected, atol=1e-10)


def test_reduced_order_condition_requires_ep3():
    with pytest.raises(NotAtEP):
        reduced_order_condition(RING_EP2)


def test_growth_dichotomy():
    rng = np.random.default_rng(23)
    for params in (CHAIN_EP3, RING_EP3):
        w = reduced_order_condition(params)
        eigvec = eig3(build_hamiltonian(params)).eigenvectors[0]
        for _ in range(20):
            psi = rng.normal(size=3) + 1j * rng.normal(size=3)
            assert growth_order(params, psi).order == 4
            # project onto the hyperplane w . psi = 0
            n = w.conj() / np.linalg.norm(w)
            plane = psi - np.dot(w, psi) / np.linalg.norm(w) * n
            assert growth_order(params, plane).order <= 2
            assert growth_order(params, (0.3 + 0.7j) * eigvec).order == 0


@pytest.mark.parametrize("params,psi0,coeffs", REFERENCE_CASES[:4])
def test_fit_recovers_coefficients(params, psi0, coeffs):
    res = propagate_analytic(params, psi0, TIMES)
    fit = fit_probability_polynomial(res)
    expected = np.zeros(5)
    expected[: len(coeffs)] = coeffs
    assert np.max(np.abs(fit.coeffs - expected)) <= 1e-6
    assert res.poly_coeffs is fit.coeffs


def test_fit_stationary_and_refusals():
    params = TrimerParams.chain(1.0, 0.5)
    v = eig3(build_hamiltonian(params)).eigenvectors[1]
    fit = fit_probability_polynomial(propagate_analytic(params, v, TIMES))
    assert np.allclose(fit.coeffs, [1, 0, 0, 0, 0], atol=1e-8)
    with pytest.raises(OscillationPresent):
        fit_probability_polynomial(propagate_analytic(RING_EP2, [1, 0, 0], TIMES))
    with pytest.raises(ValueError):
        fit_probability_polynomial(propagate_analytic(CHAIN_EP3, [1, 0, 0], TIMES[:5]))


def test_chi_fit_in_kappa_units():
    for kappa, j in ((1.0, 0.5), (1.0, 1.0), (2.0, 1.0)):
        params = TrimerParams.ring(kappa, j, math.sqrt(j * j + 2 * kappa ** 2), math.pi / 2)
        res = propagate_numeric(build_hamiltonian(params), [0, 1, 0], 10 / kappa,
                                1e-3 / kappa, record_every=50)
        assert abs(fit_probability_polynomial(res, scale=kappa).coeffs[4] - chi_factor(kappa, j)) <= 1e-4


def test_no_snap_is_diagonalizable_treatment():
    params = TrimerParams.chain(1.0, SQRT2 * (1 - 1e-3))
    snapped = propagate_analytic(params, [1, 0, 0], TIMES)
    plain = propagate_analytic(params, [1, 0, 0], TIMES, snap=False)
    assert snapped.growth is None and plain.growth is None     # not within tol of the EP
    near = TrimerParams.chain(1.0, 1.41421356237)
    assert propagate_analytic(near, [1, 0, 0], TIMES).growth.order == 4
    assert propagate_analytic(near, [1, 0, 0], TIMES[:3], snap=False).growth is None

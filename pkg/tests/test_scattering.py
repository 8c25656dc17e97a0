import math

import numpy as np
import pytest

from pt_trimer.errors import BandEdge, NotSingular, SingularSystem
from pt_trimer.scattering import (CHAIN_CONTRAST, chain_denominator, chain_scattering,
                                  emission_contrast, numeric_scattering_oracle,
                                  ring_contrast_formula, ring_denominator, ring_scattering,
                                  scattering_sweep, singularity_gamma_ring)

SQRT2 = math.sqrt(2.0)


@pytest.mark.parametrize("gamma", [0.3, 1.0, 2.0, 4.0])
def test_chain_transparent_at_half_band(gamma):
    r = chain_scattering(gamma, math.pi / 2)
    assert abs(r.t_left - 1) < 1e-12 and abs(r.r_left) < 1e-12 and abs(r.r_right) < 1e-12


def test_chain_golden_points():
    assert chain_scattering(1.0, math.pi / 4).singular
    assert chain_scattering(1.0, 3 * math.pi / 4).singular
    r = chain_scattering(2.0, math.pi / 3)
    assert math.isclose(r.T, 3 / 7, rel_tol=1e-12)
    assert math.isclose(numeric_scattering_oracle("chain", 2.0, math.pi / 3).T, 3 / 7, rel_tol=1e-8)
    for k in np.linspace(0.1, 3.0, 7):
        r = chain_scattering(0.0, k)
        assert math.isclose(r.T, 1.0, rel_tol=1e-12) and r.R_left < 1e-24


def test_singular_fields_are_non_finite():
    r = chain_scattering(1.0, math.pi / 4)
    assert math.isnan(r.T) and math.isnan(r.R_left) and np.isnan(r.t_left)
    assert abs(r.denominator) < 1e-10


def test_band_edges_rejected():
    for k in (0.0, math.pi):
        with pytest.raises(BandEdge):
            chain_scattering(1.0, k)
        with pytest.raises(BandEdge):
            ring_scattering(1.0, 0.0, k)
    with pytest.raises(ValueError):
        chain_scattering(1.0, 4.0)


def test_reciprocity_and_hermitian_unitarity():
    rng = np.random.default_rng(31)
    for _ in range(500):
        gamma, phi, k = rng.uniform(0, 3), rng.uniform(0, 2 * math.pi), rng.uniform(0.01, 3.13)
        for r in (chain_scattering(gamma, k), ring_scattering(gamma, phi, k)):
            if not r.singular:
                assert abs(abs(r.t_left) - abs(r.t_right)) <= 1e-12 * max(1, abs(r.t_left))
        for r in (chain_scattering(0.0, k), ring_scattering(0.0, phi, k)):
            assert abs(r.T + r.R_left - 1) <= 1e-12 and abs(r.T + r.R_right - 1) <= 1e-12


def test_chain_gamma_flip():
    for k in (0.3, 1.1, 2.5):
        a, b = chain_scattering(0.7, k), chain_scattering(-0.7, k)
        assert abs(a.r_left - b.r_right) < 1e-14


def test_chain_singularity_manifold_scan():
    gammas = np.linspace(0.01, 4, 400)
    ks = np.linspace(0.001, math.pi - 0.001, 3000)
    G, K = np.meshgrid(gammas, ks, indexing="ij")
    # scale-free: both terms vanish together at the band-edge corner, which is no zero
    d = np.abs(1j * np.sin(K) - np.exp(2j * K) * G ** 2 * np.cos(K))
    ratio = d / (np.sin(K) + G ** 2 * np.abs(np.cos(K)))
    near = np.argwhere(ratio < 0.02)
    assert near.size
    assert np.all(np.abs(gammas[near[:, 0]] - 1) < 0.03)
    kn = ks[near[:, 1]]
    assert np.all(np.minimum(np.abs(kn - math.pi / 4), np.abs(kn - 3 * math.pi / 4)) < 0.03)
    for k0 in (math.pi / 4, 3 * math.pi / 4):
        assert abs(chain_denominator(1.0, k0)) < 1e-15


def test_ring_golden_points():
    assert ring_scattering(SQRT2, math.pi / 2, math.pi / 4).singular
    near = ring_scattering(SQRT2, math.pi / 2, math.pi / 4 + 1e-4)
    assert math.isclose(near.T / near.R_left, 1 / 3, rel_tol=0.01)
    assert math.isclose(near.T_right / near.R_right, 3, rel_tol=0.01)


def test_ring_half_band_transmission_and_flux_conservation():
    rng = np.random.default_rng(32)
    for _ in range(100):
        gamma, phi = rng.uniform(0, 3), rng.uniform(0, 2 * math.pi)
        r = ring_scattering(gamma, phi, math.pi / 2)
        target = 1 / (math.cos(phi) ** 2 + 1)
        assert abs(r.T - target) <= 1e-12 and abs(r.T_right - target) <= 1e-12
        # at k = pi/2 the emission and absorption cancel: T + R = 1 on both sides
        assert abs(r.T + r.R_left - 1) <= 1e-12 and abs(r.T + r.R_right - 1) <= 1e-12


def test_ring_symmetry_about_half_band():
    ks = np.linspace(0.05, math.pi / 2 - 0.05, 40)
    for gamma in (0.5, 1.0, 2.0):
        for k in ks:
            a, b = ring_scattering(gamma, math.pi / 2, k), ring_scattering(gamma, math.pi / 2, math.pi - k)
            if not (a.singular or b.singular):
                assert abs(a.T - b.T) <= 1e-10 * max(1, a.T)
    asym = max(abs(ring_scattering(1.0, 0.0, k).T - ring_scattering(1.0, 0.0, math.pi - k).T) for k in ks)
    assert asym > 1e-3


@pytest.mark.parametrize("phi,expected", [
    (math.pi / 2, SQRT2),
    (0.0, math.sqrt(2 + SQRT2)),
    (math.pi, math.sqrt(2 - SQRT2)),
])
def test_singularity_gamma_ring(phi, expected):
    g = singularity_gamma_ring(phi)
    assert math.isclose(g, expected, rel_tol=1e-12)
    assert abs(ring_denominator(g, phi, math.pi / 4)) < 1e-12


def test_singularity_gamma_ring_range():
    lo, hi = math.sqrt(2 - SQRT2), math.sqrt(2 + SQRT2)
    for phi in np.linspace(0, 2 * math.pi, 97):
        assert lo - 1e-12 <= singularity_gamma_ring(phi) <= hi + 1e-12


def test_emission_contrast():
    assert math.isclose(emission_contrast(1.0, "chain"), 3 - 2 * SQRT2)
    assert math.isclose(CHAIN_CONTRAST, 0.1716, abs_tol=1e-4)
    assert math.isclose(emission_contrast(SQRT2, "ring", math.pi / 2), 1 / 3)
    assert math.isclose(ring_contrast_formula(1e9), 1.0, rel_tol=1e-8)
    with pytest.raises(NotSingular):
        emission_contrast(2.0, "chain")
    with pytest.raises(NotSingular):
        emission_contrast(1.0, "ring", math.pi / 2)
    with pytest.raises(NotSingular):
        emission_contrast(0.2, "ring")
    with pytest.raises(ValueError):
        emission_contrast(1.0, "dimer")


def test_sweep_rows():
    ks = np.linspace(0, math.pi, 9)[1:-1]
    rows = scattering_sweep("chain", [0.5, 1.0], ks)
    assert len(rows) == 14 and rows[0].phi is None
    flagged = [(r.gamma, r.k) for r in rows if r.result.singular]
    assert flagged == [(1.0, ks[1]), (1.0, ks[5])]
    with pytest.raises(ValueError):
        scattering_sweep("ring", [1.0], ks)


def test_oracle_matches_closed_forms():
    rng = np.random.default_rng(33)
    checked = 0
    while checked < 300:
        system = ["chain", "ring"][checked % 2]
        gamma, phi, k = rng.uniform(0, 2.5), rng.uniform(0, 2 * math.pi), rng.uniform(0.05, 3.09)
        closed = chain_scattering(gamma, k) if system == "chain" else ring_scattering(gamma, phi, k)
        if closed.singular or abs(closed.denominator) < 1e-2:
            continue
        ref = numeric_scattering_oracle(system, gamma, k, phi, n_lead=60)
        for a, b in ((closed.T, ref.T), (closed.R_left, ref.R_left), (closed.R_right, ref.R_right)):
            assert abs(a - b) <= 1e-8 * max(1, b)
        checked += 1


def test_oracle_hermitian_unitarity_and_errors():
    r = numeric_scattering_oracle("ring", 0.0, 1.234, 0.0)
    assert abs(r.T + r.R_left - 1) < 1e-10
    with pytest.raises(SingularSystem):
        numeric_scattering_oracle("chain", 1.0, math.pi / 4)
    with pytest.raises(ValueError):
        numeric_scattering_oracle("chain", 1.0, 1.0, n_lead=10)


def test_chain_growth_towards_singularity():
    ts = [abs(chain_scattering(g, math.pi / 4).t_left) for g in (0.9, 0.99, 0.999)]
    assert ts[0] < ts[1] < ts[2] and math.isfinite(ts[2])

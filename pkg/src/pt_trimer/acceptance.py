"""Acceptance suite shared by ``pt-trimer verify`` and the test suite.

Each criterion returns a list of named sub-checks; a criterion passes when
all of its sub-checks do. Random corpora use fixed seeds.
"""
from __future__ import annotations

import cmath
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynamics import (OSCILLATION, POWER_LAW, POWER_LAW_OSCILLATION, UNCHANGED, chi_factor,
                       fit_probability_polynomial, growth_order, propagate_analytic,
                       propagate_numeric)
from .lattice import (LatticeConfig, Packet, default_regions, evolve_lattice, gaussian_packet,
                      measure_platform, platform_height_unit)
from .linalg import characteristic_coefficients, eig3
from .models import TrimerParams, build_hamiltonian
from .scattering import (CHAIN_CONTRAST, chain_denominator, chain_scattering, emission_contrast,
                         numeric_scattering_oracle, ring_denominator, ring_scattering)
from .spectral import (Axis, PhaseKind, classify_phase, critical_gamma_ep2, phase_diagram)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.label for c in self.checks if not c.passed]
        tail = f" (failed: {'; '.join(failed)})" if failed else ""
        return f"{status} [{self.number:2d}] {self.title} ({self.seconds:.1f}s){tail}"


def _check(label: str, value: float, limit: float) -> Check:
    """Pass when ``value <= limit``; both are reported."""
    return Check(label, bool(value <= limit), f"{value:.3e} <= {limit:.1e}")


def _match_sets(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return min(float(np.max(np.abs(a[list(p)] - b))) for p in itertools.permutations(range(3)))


# -- 1 -----------------------------------------------------------------------

def chain_spectrum(n: int = 1000, seed: int = 1) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        kappa = rng.uniform(0.1, 3.0)
        gamma = rng.uniform(-2.0, 2.0) * kappa
        decomp = eig3(build_hamiltonian(TrimerParams.chain(kappa, gamma)))
        s = cmath.sqrt(2.0 * kappa ** 2 - gamma ** 2)
        worst = max(worst, _match_sets(decomp.eigenvalues, [0.0, s, -s]))
    return [_check(f"max eigenvalue error over {n} draws", worst, 1e-10)]


# -- 2 -----------------------------------------------------------------------

def chain_ep3_location(kappas=(0.25, 0.5, 1.0, 2.0, 3.7)) -> list:
    checks = []
    for kappa in kappas:
        gc = SQRT2 * kappa
        at = classify_phase(TrimerParams.chain(kappa, gc)).kind
        below = classify_phase(TrimerParams.chain(kappa, gc * (1 - 1e-4))).kind
        above = classify_phase(TrimerParams.chain(kappa, gc * (1 + 1e-4))).kind
        ok = at is PhaseKind.EP3 and below is PhaseKind.EXACT and above is PhaseKind.BROKEN
        checks.append(Check(f"kappa={kappa}", ok, f"{below.value}/{at.value}/{above.value}"))
    return checks


# -- 3 -----------------------------------------------------------------------

def ring_cubic(n: int = 10_000, seed: int = 3) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        kappa, j, gamma = rng.uniform(-2.0, 2.0, 3)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        c2, c1, c0 = characteristic_coefficients(
            build_hamiltonian(TrimerParams.ring(kappa, j, gamma, phi)))
        expected = (0.0, gamma ** 2 - j ** 2 - 2 * kappa ** 2, 2 * j * kappa ** 2 * math.cos(phi))
        for got, want in zip((c2, c1, c0), expected):
            worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    return [_check(f"max coefficient error over {n} draws", worst, 1e-12)]


# -- 4 and 5 -------------------------------------------------------------------

def _ep2_corpus(n: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        kappa, j = rng.uniform(0.1, 2.0, 2)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        radicand = 2 * kappa ** 2 + j ** 2 - 3 * abs(j * kappa ** 2 * math.cos(phi)) ** (2 / 3)
        if radicand > 1e-3:
            out.append((kappa, j, phi))
    return out


def ep2_formula(n: int = 1000, seed: int = 4) -> list:
    worst_disc = 0.0
    bad = 0
    for kappa, j, phi in _ep2_corpus(n, seed):
        gc = critical_gamma_ep2(kappa, j, phi)
        label = classify_phase(TrimerParams.ring(kappa, j, gc, phi))
        worst_disc = max(worst_disc, abs(label.discriminant))
        bad += label.kind not in (PhaseKind.EP2, PhaseKind.EP3)
    golden = critical_gamma_ep2(0.5, 1.0, -math.pi / 3)
    return [
        _check(f"max |discriminant| at gamma_c over {n} draws", worst_disc, 1e-9),
        Check("every gamma_c classifies as ep2/ep3", bad == 0, f"{bad} misclassified"),
        _check("gamma_c(1/2, 1, -pi/3) - sqrt3/2", abs(golden - SQRT3 / 2), 1e-12),
    ]


def ep2_energy_relation(n: int = 1000, seed: int = 4) -> list:
    worst = 0.0
    count = 0
    for kappa, j, phi in _ep2_corpus(n, seed):
        params = TrimerParams.ring(kappa, j, critical_gamma_ep2(kappa, j, phi), phi)
        decomp = eig3(build_hamiltonian(params))
        blocks = dict((size, E) for E, size in decomp.jordan_blocks)
        if 2 not in blocks:
            continue
        count += 1
        worst = max(worst, abs(blocks[1] + 2 * blocks[2]))
    return [Check("corpus points at an EP2", count > 0.9 * n, f"{count}/{n}"),
            _check("max |E1 + 2 E2|", worst, 1e-9)]


# -- 6 -----------------------------------------------------------------------

def _poly(coeffs, t):
    return np.polynomial.polynomial.polyval(t, coeffs)


EP3_GOLDEN = (
    ("chain [1,0,0]", TrimerParams.chain(1.0, SQRT2), [1, 0, 0],
     (1, 2 * SQRT2, 4, 2 * SQRT2, 1)),
    ("chain [1,0,1]/sqrt2", TrimerParams.chain(1.0, SQRT2), np.array([1, 0, 1]) / SQRT2,
     (1, 0, 4)),
    ("ring [1,0,0]", TrimerParams.ring(1.0, 0.5, 1.5, math.pi / 2), [1, 0, 0],
     (1, 3, 4.5, 3, 1.5)),
    ("ring [0,1,0]", TrimerParams.ring(1.0, 0.5, 1.5, math.pi / 2), [0, 1, 0],
     (1, 0, 0, 0, 1.5)),
)


def ep3_dynamics() -> list:
    times = np.linspace(0.0, 10.0, 201)
    checks = []
    for label, params, psi0, coeffs in EP3_GOLDEN:
        analytic = propagate_analytic(params, psi0, times)
        golden = _poly(coeffs, times)
        rel = float(np.max(np.abs(analytic.probability - golden) / golden))
        checks.append(_check(f"{label} analytic vs polynomial", rel, 1e-9))
        numeric = propagate_numeric(build_hamiltonian(params), psi0, 10.0, 1e-3, record_every=50)
        rel_n = float(np.max(np.abs(numeric.probability - analytic.probability)
                             / analytic.probability))
        checks.append(_check(f"{label} analytic vs RK4", rel_n, 1e-6))
    return checks


# -- 7 -----------------------------------------------------------------------

def ep2_behaviors() -> list:
    minus = TrimerParams.ring(0.5, 1.0, SQRT3 / 2, -math.pi / 3)
    plus = TrimerParams.ring(0.5, 1.0, SQRT3 / 2, math.pi / 3)
    cases = (
        ("a", minus, [1, 0, 0], 2, POWER_LAW_OSCILLATION),
        ("b", minus, np.array([1, -1, 0]) / SQRT2, 2, POWER_LAW),
        ("c", minus, np.ones(3) / SQRT3, 0, OSCILLATION),
        ("d", plus, np.array([1, 0, 1]) / SQRT2, 0, UNCHANGED),
    )
    checks = []
    times = np.linspace(0.0, 20.0, 401)
    for tag, params, psi0, order, behavior in cases:
        report = growth_order(params, psi0)
        checks.append(Check(f"({tag}) order {order} {behavior}",
                            report.order == order and report.behavior == behavior,
                            f"got {report.order} {report.behavior}"))
    c_params, c_psi = cases[2][1], cases[2][2]
    res = propagate_analytic(c_params, c_psi, times)
    exact = (25.0 - 16.0 * np.cos(1.5 * times)) / 9.0
    checks.append(_check("(c) P(t) vs (25-16cos(3t/2))/9",
                         float(np.max(np.abs(res.probability - exact))), 1e-8))
    period = growth_order(c_params, c_psi).period
    checks.append(_check("(c) period vs 4pi/3", abs(period - 4 * math.pi / 3), 1e-8))
    shifted = propagate_analytic(c_params, c_psi, times + 4 * math.pi / 3)
    checks.append(_check("(c) |P(t+T) - P(t)|",
                         float(np.max(np.abs(shifted.probability - res.probability))), 1e-8))
    d = propagate_analytic(cases[3][1], cases[3][2], times)
    checks.append(_check("(d) |P - 1|", float(np.max(np.abs(d.probability - 1.0))), 1e-8))
    site = np.abs(d.states) ** 2
    checks.append(_check("(d) |P1 - P3|", float(np.max(np.abs(site[:, 0] - site[:, 2]))), 1e-8))
    return checks


# -- 8 -----------------------------------------------------------------------

def chi_fit(pairs=((1.0, 0.5), (1.0, 1.0), (2.0, 1.0))) -> list:
    checks = []
    for kappa, j in pairs:
        params = TrimerParams.ring(kappa, j, math.sqrt(j * j + 2 * kappa * kappa), math.pi / 2)
        res = propagate_numeric(build_hamiltonian(params), [0, 1, 0], 10.0 / kappa,
                                1e-3 / kappa, record_every=50)
        fit = fit_probability_polynomial(res, scale=kappa)
        checks.append(_check(f"(kappa={kappa}, J={j}) |alpha4 - chi|",
                             abs(fit.coeffs[4] - chi_factor(kappa, j)), 1e-4))
    return checks


# -- 9 -----------------------------------------------------------------------

def scattering_golden(n: int = 100, seed: int = 9) -> list:
    checks = []
    worst = 0.0
    for gamma in (0.5, 1.0, 2.0):
        res = chain_scattering(gamma, math.pi / 2)
        worst = max(worst, abs(res.t_left - 1), abs(res.r_left), abs(res.r_right))
    checks.append(_check("chain k=pi/2: |t-1|, |r|", worst, 1e-12))
    d = max(abs(chain_denominator(1.0, math.pi / 4 + s * 1e-6)) for s in (-1, 1))
    checks.append(_check("chain gamma=1, k=pi/4+-1e-6: |denominator|", d, 1e-5))

    rng = np.random.default_rng(seed)
    worst_t = worst_r = 0.0
    for _ in range(n):
        gamma = rng.uniform(0.0, 3.0)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        res = ring_scattering(gamma, phi, math.pi / 2)
        target = 1.0 / (math.cos(phi) ** 2 + 1.0)
        worst_t = max(worst_t, abs(res.T - target), abs(res.T_right - target))
        worst_r = max(worst_r, abs(res.R_left - target), abs(res.R_right - target))
    checks.append(_check("ring k=pi/2: T_L, T_R = 1/(cos^2 phi + 1)", worst_t, 1e-12))
    checks.append(_check("ring k=pi/2: R_L, R_R = 1/(cos^2 phi + 1)", worst_r, 1e-12))

    worst_ratio = 0.0
    for s in (-1, 1):
        res = ring_scattering(SQRT2, math.pi / 2, math.pi / 4 + s * 1e-4)
        worst_ratio = max(worst_ratio,
                          abs(res.T / res.R_left / (1 / 3) - 1),
                          abs(res.T_right / res.R_right / 3 - 1))
    checks.append(_check("ring near-singular T_L/R_L -> 1/3, T_R/R_R -> 3", worst_ratio, 0.01))
    return checks


# -- 10 ----------------------------------------------------------------------

def oracle_agreement(n: int = 1000, seed: int = 10) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n:
        system = "chain" if rng.random() < 0.5 else "ring"
        gamma = rng.uniform(0.0, 2.5)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        k = rng.uniform(0.05, math.pi - 0.05)
        if system == "chain":
            d, res = chain_denominator(gamma, k), chain_scattering(gamma, k)
        else:
            d, res = ring_denominator(gamma, phi, k), ring_scattering(gamma, phi, k)
        if abs(d) < 1e-2:
            continue
        ref = numeric_scattering_oracle(system, gamma, k, phi)
        for a, b in ((res.T, ref.T), (res.T_right, ref.T_right),
                     (res.R_left, ref.R_left), (res.R_right, ref.R_right)):
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        done += 1
    return [_check(f"max relative deviation over {n} points", worst, 1e-8)]


# -- 11 ----------------------------------------------------------------------

def fig8_platforms(n_sites: int = 1200, alpha: float = 0.02, t_end: float = 500.0) -> list:
    params = TrimerParams.chain(1.0, 1.0)
    unit = platform_height_unit(alpha)
    runs = {}
    for name, center, k in (("right input", 900, -math.pi / 4), ("left input", 300, math.pi / 4)):
        config = LatticeConfig(n_sites, n_sites // 2, params, Packet(alpha, center, k))
        final, _ = evolve_lattice(config, gaussian_packet(config), t_end)
        runs[name] = measure_platform(final, *default_regions(config))
    expected = {
        "right input": (unit, CHAIN_CONTRAST * unit),
        "left input": ((3 + 2 * SQRT2) * unit, unit),
    }
    checks = []
    for name, (left, right) in expected.items():
        got = runs[name]
        checks.append(_check(f"{name} left platform", abs(got.left / left - 1), 0.05))
        checks.append(_check(f"{name} right platform", abs(got.right / right - 1), 0.05))
    contrast = emission_contrast(1.0, "chain")
    checks.append(_check("emission ratio vs 3-2sqrt2",
                         abs(runs["right input"].ratio / contrast - 1), 0.05))
    return checks


# -- 12 ----------------------------------------------------------------------

def _exact_boundary(kappas: np.ndarray, row: np.ndarray) -> Optional[float]:
    """Smallest kappa from which every larger node is exact."""
    exact = row == PhaseKind.EXACT.value
    if not exact[-1]:
        return None
    i = len(exact) - 1
    while i > 0 and exact[i - 1]:
        i -= 1
    return float(kappas[i])


def phase_containment(workers: int = 1) -> list:
    axes = (Axis("kappa", 0.0, 2.0, 201), Axis("gamma", 0.0, 2.0, 201))
    masks = [phase_diagram(axes, TrimerParams.ring(1.0, 1.0, 0.0, phi), workers=workers)
             .mask(PhaseKind.EXACT) for phi in (0.0, math.pi / 4, math.pi / 2)]
    checks = [
        Check("exact(phi=0) subset of exact(phi=pi/4)", bool(np.all(masks[1][masks[0]])),
              f"{int(masks[0].sum())} vs {int(masks[1].sum())} nodes"),
        Check("exact(phi=pi/4) subset of exact(phi=pi/2)", bool(np.all(masks[2][masks[1]])),
              f"{int(masks[1].sum())} vs {int(masks[2].sum())} nodes"),
    ]
    phi_axis = Axis("phi", 0.0, math.pi, 201)
    kappa_axis = Axis("kappa", 0.0, 3.0, 301)
    grid = phase_diagram((phi_axis, kappa_axis), TrimerParams.ring(1.0, 1.0, SQRT3, 0.0),
                         workers=workers)
    for target, idx in ((1.00, 100), (2.43, 0)):
        b = _exact_boundary(kappa_axis.values, grid.labels[idx])
        err = math.inf if b is None else abs(b - target)
        checks.append(Check(f"exact boundary at phi={phi_axis.values[idx]:.4f} near {target}",
                            err <= 0.02, f"kappa/J = {b}"))
    return checks


CRITERIA: tuple[tuple[int, str, Callable[[], list]], ...] = (
    (1, "chain spectrum {0, +-sqrt(2k^2-g^2)}", chain_spectrum),
    (2, "chain EP3 at gamma = sqrt2 kappa", chain_ep3_location),
    (3, "ring characteristic polynomial", ring_cubic),
    (4, "EP2 critical gain formula", ep2_formula),
    (5, "E1 = -2 E2 at EP2", ep2_energy_relation),
    (6, "EP3 probability polynomials", ep3_dynamics),
    (7, "EP2 four dynamical behaviors", ep2_behaviors),
    (8, "chi factor from quartic fit", chi_fit),
    (9, "scattering golden points", scattering_golden),
    (10, "closed form vs lattice oracle", oracle_agreement),
    (11, "wave-packet emission platforms", fig8_platforms),
    (12, "phase-diagram containment and boundaries", phase_containment),
)


def run_criterion(number: int) -> CriterionResult:
    for num, title, func in CRITERIA:
        if num == number:
            start = time.perf_counter()
            try:
                checks = func()
            except Exception as exc:    # a crash is a failed criterion, not a crashed suite
                checks = [Check("raised " + type(exc).__name__, False, str(exc))]
            return CriterionResult(num, title, checks, time.perf_counter() - start)
    raise KeyError(f"no acceptance criterion {number}")


def run_all(numbers=None, echo: Optional[Callable[[str], None]] = None) -> list:
    results = []
    for num, _, _ in CRITERIA:
        if numbers is not None and num not in numbers:
            continue
        res = run_criterion(num)
        results.append(res)
        if echo is not None:
            echo(res.line())
            for c in res.checks:
                echo(f"       {'ok  ' if c.passed else 'FAIL'} {c.label}: {c.detail}")
    return results

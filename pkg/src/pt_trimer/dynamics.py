"""Time evolution at and near exceptional points.

The analytic route resolves the initial state once in Jordan coordinates,
``c = V^-1 psi(0)``, and evolves each block with ``exp(-i J t)``; inside a
Jordan block the amplitudes pick up the ``(-i t)^k / k!`` polynomial factors
behind power-law probability growth. The numeric route is a plain RK4
integration of the same Schroedinger equation and serves as the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotAtEP, OscillationPresent, StepTooLarge
from .integrate import rk4_evolve
from .linalg import DEFAULT_TOL, SpectralDecomposition, eig3
from .models import TrimerParams, build_hamiltonian
from .spectral import PhaseKind, classify_phase

UNCHANGED = "unchanged"
OSCILLATION = "oscillation"
POWER_LAW = "power-law"
POWER_LAW_OSCILLATION = "power-law-with-oscillation"

#: a Jordan coordinate counts as weighted above this fraction of |c|
WEIGHT_TOL = 1e-10


def initial_state(psi0) -> np.ndarray:
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.shape != (3,) or not np.all(np.isfinite(psi)):
        raise ValueError("initial state must be 3 finite amplitudes")
    if not np.any(psi):
        raise ValueError("initial state must not be the zero vector")
    return psi


@dataclass(frozen=True)
class GrowthReport:
    order: int
    behavior: str
    period: Optional[float]
    coordinates: np.ndarray

    @property
    def oscillating(self) -> bool:
        return self.behavior in (OSCILLATION, POWER_LAW_OSCILLATION)


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray          # (n, 3)
    probability: np.ndarray
    growth: Optional[GrowthReport] = None
    poly_coeffs: Optional[np.ndarray] = None


def _block_components(decomp: SpectralDecomposition, c: np.ndarray):
    """Per block, the site-space vectors ``V_b S^n c_b`` (S = block shift)."""
    out = []
    for (E, size), sl in zip(decomp.jordan_blocks, decomp.block_slices):
        cb = c[sl]
        Vb = decomp.similarity[:, sl]
        vecs = []
        for n in range(size):
            shifted = np.zeros(size, dtype=complex)
            shifted[: size - n] = cb[n:]
            vecs.append(Vb @ shifted)
        out.append((E, size, cb, vecs))
    return out


def _growth(decomp: SpectralDecomposition, psi: np.ndarray, tol: float) -> GrowthReport:
    c = decomp.coordinates(psi)
    weight_thr = WEIGHT_TOL * np.linalg.norm(c)
    blocks = _block_components(decomp, c)
    coalescing = max(range(len(blocks)), key=lambda b: blocks[b][1])
    order = 0
    for k, ck in enumerate(blocks[coalescing][2]):
        if abs(ck) > weight_thr:
            order = 2 * k
    weighted = [b for b, blk in enumerate(blocks) if np.any(np.abs(blk[2]) > weight_thr)]

    # total probability only beats if two weighted blocks at different energies interfere
    psi_scale = np.linalg.norm(psi) ** 2
    oscillation, period = False, None
    for a in weighted:
        for b in weighted:
            if b <= a or abs(blocks[a][0] - blocks[b][0]) <= tol:
                continue
            gap = abs(blocks[a][0] - blocks[b][0])
            period = 2.0 * math.pi / gap
            for u in blocks[a][3]:
                for w in blocks[b][3]:
                    if abs(np.vdot(u, w)) > WEIGHT_TOL * psi_scale:
                        oscillation = True
    if order > 0:
        behavior = POWER_LAW_OSCILLATION if oscillation else POWER_LAW
    else:
        behavior = OSCILLATION if oscillation else UNCHANGED
    return GrowthReport(order, behavior, period, c)


def evolve_decomposition(decomp: SpectralDecomposition, psi0, times) -> np.ndarray:
    """States ``V exp(-i h t) V^-1 psi0`` for every ``t`` in ``times``; shape (n, 3)."""
    psi = initial_state(psi0)
    times = np.asarray(times, dtype=float)
    c = decomp.coordinates(psi)
    coords = np.zeros((times.size, 3), dtype=complex)
    for (E, size), sl in zip(decomp.jordan_blocks, decomp.block_slices):
        cb = c[sl]
        phase = np.exp(-1j * E * times)
        for i in range(size):
            acc = np.zeros(times.size, dtype=complex)
            term = np.ones(times.size, dtype=complex)
            for k in range(size - i):
                acc += term * cb[i + k]
                term = term * (-1j * times) / (k + 1)
            coords[:, sl.start + i] = phase * acc
    return coords @ decomp.similarity.T


def propagate_analytic(params: TrimerParams, psi0, times, tol: float = DEFAULT_TOL,
                       snap: bool = True) -> EvolutionResult:
    """Jordan-form evolution; valid in the exact, broken and EP regimes.

    At an exceptional point the result carries a :class:`GrowthReport`.
    ``snap=False`` forces a diagonalizable treatment for sensitivity studies.
    """
    psi = initial_state(psi0)
    decomp = eig3(build_hamiltonian(params), tol, snap=snap)
    times = np.asarray(times, dtype=float)
    states = evolve_decomposition(decomp, psi, times)
    growth = None if decomp.diagonalizable else _growth(decomp, psi, tol)
    return EvolutionResult(times, states, np.sum(np.abs(states) ** 2, axis=1), growth)


def default_step(H) -> float:
    kappa = abs(np.asarray(H)[0, 1])
    return 1e-3 / kappa if kappa > 0 else 1e-3


def propagate_numeric(H, psi0, t_end: float, dt: Optional[float] = None,
                      record_every: int = 1) -> EvolutionResult:
    """Fixed-step RK4 integration of ``i dpsi/dt = H psi``.

    ``dt`` defaults to ``1e-3 / kappa`` with kappa read off the 1-2 coupling.

    Raises
    ------
    StepTooLarge
        If ``dt * |H|_2 > 0.1``.
    """
    H = np.asarray(H, dtype=complex)
    psi = initial_state(psi0)
    if dt is None:
        dt = default_step(H)
    bound = np.linalg.norm(H, 2)
    if dt * bound > 0.1:
        raise StepTooLarge(f"dt * |H| = {dt * bound:.3g} exceeds 0.1")
    times, states = rk4_evolve(lambda y: H @ y, psi, t_end, dt, record_every)
    return EvolutionResult(times, states, np.sum(np.abs(states) ** 2, axis=1))


def chi_factor(kappa: float, j: float) -> float:
    """Quartic growth coefficient of a centre-site excitation at the ring EP3."""
    gc = math.sqrt(j * j + 2.0 * kappa * kappa)
    return (2.0 * kappa ** 2 + j * j + j * gc) / (kappa ** 2 + j * j + j * gc)


def growth_order(params: TrimerParams, psi0, tol: float = DEFAULT_TOL) -> GrowthReport:
    """Leading power of the probability growth and the behavior tag at an EP.

    Order is twice the highest weighted Jordan coordinate within the
    coalescing block. The oscillation tag is set when another block at a
    different energy is weighted and its contribution interferes with the
    coalescing one; orthogonal contributions leave the total probability
    flat even though the site populations beat.
    """
    label = classify_phase(params, tol)
    if not label.at_ep:
        raise NotAtEP(f"configuration is {label.kind.value}, not an exceptional point")
    decomp = eig3(build_hamiltonian(params), tol)
    return _growth(decomp, initial_state(psi0), tol)


def reduced_order_condition(params: TrimerParams, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Row functional ``w`` with ``w . psi(0) = 0`` iff the quartic term vanishes at an EP3.

    It is the last row of ``V^-1`` (the left eigenvector), scaled so its
    first entry is 1.
    """
    if classify_phase(params, tol).kind is not PhaseKind.EP3:
        raise NotAtEP("reduced-order condition is defined at an EP3 only")
    decomp = eig3(build_hamiltonian(params), tol)
    row = decomp.similarity_inv[2]
    return row / row[0]


@dataclass(frozen=True)
class PolynomialFit:
    coeffs: np.ndarray      # alpha_0 .. alpha_4
    residual: float         # RMS


def fit_probability_polynomial(result: EvolutionResult, scale: float = 1.0) -> PolynomialFit:
    """Least-squares fit of ``P(t)`` to ``sum_n alpha_n (scale t)^n``, n = 0..4.

    Use ``scale = kappa`` to get coefficients in powers of ``kappa t``.
    """
    if result.times.size < 12:
        raise ValueError("need at least 12 samples for a quartic fit")
    if result.growth is not None and result.growth.oscillating:
        raise OscillationPresent("a distinct eigenvalue carries weight; P(t) is not a polynomial")
    tau = scale * np.asarray(result.times, dtype=float)
    coeffs = np.polynomial.polynomial.polyfit(tau, result.probability, 4)
    model = np.polynomial.polynomial.polyval(tau, coeffs)
    resid = float(np.sqrt(np.mean((model - result.probability) ** 2)))
    result.poly_coeffs = coeffs
    return PolynomialFit(coeffs, resid)

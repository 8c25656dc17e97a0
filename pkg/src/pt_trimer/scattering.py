"""Scattering of lead waves off a trimer embedded in a uniform chain.

Leads have coupling kappa = 1 and dispersion ``E = -2 cos k``. The input
(left) lead attaches to the gain site, the output (right) lead to the loss
site. Closed forms are valid for the chain and for the ring with J = kappa.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import BandEdge, NotSingular, SingularSystem

#: a denominator below this magnitude is a spectral singularity
SINGULAR_TOL = 1e-10

CHAIN_CONTRAST = 3.0 - 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class ScatteringResult:
    k: float
    t_left: complex
    t_right: complex
    r_left: complex
    r_right: complex
    T: float
    R_left: float
    R_right: float
    singular: bool
    denominator: complex = complex("nan")

    @classmethod
    def from_coefficients(cls, k, tl, tr, rl, rr, denominator=complex("nan")):
        return cls(k, tl, tr, rl, rr, abs(tl) ** 2, abs(rl) ** 2, abs(rr) ** 2,
                   False, denominator)

    @classmethod
    def singular_point(cls, k, denominator):
        nan = complex("nan")
        return cls(k, nan, nan, nan, nan, math.nan, math.nan, math.nan, True, denominator)

    @property
    def T_right(self) -> float:
        return abs(self.t_right) ** 2


def _check_k(k: float):
    if not 0.0 <= k <= math.pi:
        raise ValueError(f"k = {k} outside the band [0, pi]")
    if k == 0.0 or k == math.pi or math.sin(k) == 0.0:
        raise BandEdge(f"k = {k} is a band edge; leads carry no flux")


def chain_denominator(gamma: float, k: float) -> complex:
    return 1j * math.sin(k) - cmath.exp(2j * k) * gamma ** 2 * math.cos(k)


def chain_scattering(gamma: float, k: float) -> ScatteringResult:
    _check_k(k)
    d = chain_denominator(gamma, k)
    if abs(d) < SINGULAR_TOL:
        return ScatteringResult.singular_point(k, d)
    t = 1j * math.sin(k) / d
    g2c = gamma ** 2 * math.cos(k)
    gs = gamma * math.sin(2.0 * k)
    return ScatteringResult.from_coefficients(k, t, t, (g2c + gs) / d, (g2c - gs) / d, d)


def ring_denominator(gamma: float, phi: float, k: float) -> complex:
    return (1j * cmath.exp(-2j * k) * math.sin(k) + math.cos(phi)
            + math.cos(k) * (1.0 - gamma ** 2))


def ring_scattering(gamma: float, phi: float, k: float) -> ScatteringResult:
    """Uniform ring (J = kappa = 1) with flux ``phi``."""
    _check_k(k)
    d = ring_denominator(gamma, phi, k)
    if abs(d) < SINGULAR_TOL:
        return ScatteringResult.singular_point(k, d)
    s, c = math.sin(k), math.cos(k)
    back = cmath.exp(-2j * k)
    tl = 1j * s * (cmath.exp(-1j * phi) + 2.0 * c) / d
    tr = 1j * s * (cmath.exp(1j * phi) + 2.0 * c) / d
    rl = 1j * s * (back - 2j * gamma * c) / d - 1.0
    rr = 1j * s * (back + 2j * gamma * c) / d - 1.0
    return ScatteringResult.from_coefficients(k, tl, tr, rl, rr, d)


def singularity_gamma_ring(phi: float) -> float:
    """Gain/loss putting the ring's k = pi/4 scattering pole on the real axis."""
    return math.sqrt(math.sqrt(2.0) * math.cos(phi) + 2.0)


def ring_contrast_formula(gamma: float) -> float:
    """Left- over right-traveling emission contrast of the ring, without validation."""
    r = math.sqrt(2.0) * gamma
    return (r - 1.0) / (r + 1.0)


def emission_contrast(gamma: float, system: str, phi: Optional[float] = None,
                      tol: float = 1e-9) -> float:
    """Emission contrast at a spectral singularity.

    Chain: the right/left ratio ``3 - 2 sqrt 2`` (requires gamma = kappa = 1).
    Ring: ``(sqrt2 gamma - 1)/(sqrt2 gamma + 1)``; with ``phi`` the gain must be
    the singular value for that flux, otherwise it must lie in the range
    swept out by all fluxes.
    """
    if system == "chain":
        if abs(abs(gamma) - 1.0) > tol:
            raise NotSingular(f"chain is singular only at gamma = 1, got {gamma}")
        return CHAIN_CONTRAST
    if system != "ring":
        raise ValueError(f"unknown system {system!r}")
    if phi is not None:
        # k = pi/4 pole at 2 + sqrt2 cos(phi), k = 3pi/4 pole at 2 - sqrt2 cos(phi)
        targets = (2.0 + math.sqrt(2.0) * math.cos(phi), 2.0 - math.sqrt(2.0) * math.cos(phi))
        if min(abs(gamma ** 2 - g2) for g2 in targets) > tol * max(1.0, gamma ** 2):
            raise NotSingular(f"gamma = {gamma} is not singular at phi = {phi}")
    else:
        lo, hi = math.sqrt(2.0 - math.sqrt(2.0)), math.sqrt(2.0 + math.sqrt(2.0))
        if not lo - tol <= abs(gamma) <= hi + tol:
            raise NotSingular(f"|gamma| = {gamma} outside the singular range [{lo:.6f}, {hi:.6f}]")
    return ring_contrast_formula(gamma)


@dataclass(frozen=True)
class SweepRow:
    system: str
    gamma: float
    phi: Optional[float]
    k: float
    result: ScatteringResult


def scattering_sweep(system: str, gammas: Iterable[float], ks: Iterable[float],
                     phi: Optional[float] = None) -> list[SweepRow]:
    """Table of closed-form results over gamma (outer) and k (inner)."""
    if system == "ring" and phi is None:
        raise ValueError("ring sweeps need a flux")
    rows = []
    for g in gammas:
        for k in ks:
            if system == "chain":
                res = chain_scattering(g, k)
            elif system == "ring":
                res = ring_scattering(g, phi, k)
            else:
                raise ValueError(f"unknown system {system!r}")
            rows.append(SweepRow(system, float(g), None if system == "chain" else float(phi),
                                 float(k), res))
    return rows


def _lead_trimer_matrix(system: str, gamma: float, phi: float, n_lead: int) -> np.ndarray:
    # sites: left lead j = -(n_lead-1)..0, trimer a1 a2 a3, right lead j = 1..n_lead
    n = 2 * n_lead + 3
    H = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    H[idx, idx + 1] = -1.0
    H[idx + 1, idx] = -1.0
    a1 = n_lead
    H[a1, a1] = 1j * gamma
    H[a1 + 2, a1 + 2] = -1j * gamma
    if system == "ring":
        H[a1, a1 + 2] = -cmath.exp(1j * phi)
        H[a1 + 2, a1] = -cmath.exp(-1j * phi)
    return H


def _solve_side(H, n_lead, k, from_left: bool):
    n = H.shape[0]
    E = -2.0 * math.cos(k)
    A = np.zeros((n + 2, n + 2), dtype=complex)
    b = np.zeros(n + 2, dtype=complex)
    # interior Schroedinger rows (outermost sites lack a neighbour)
    A[: n - 2, :n] = (E * np.eye(n) - H)[1:-1]
    r_col, t_col = n, n + 1
    left_j = np.arange(-(n_lead - 1), 1)        # lattice 0 .. n_lead-1
    right_j = np.arange(1, n_lead + 1)          # lattice n_lead+3 .. n-1
    rows = [(0, left_j[0]), (1, left_j[1])]
    rows_r = [(n - 1, right_j[-1]), (n - 2, right_j[-2])]
    eq = n - 2
    for site, j in rows:
        A[eq, site] = 1.0
        if from_left:    # e^{ikj} + r e^{-ikj}
            A[eq, r_col] = -cmath.exp(-1j * k * j)
            b[eq] = cmath.exp(1j * k * j)
        else:            # t e^{-ikj}
            A[eq, t_col] = -cmath.exp(-1j * k * j)
        eq += 1
    for site, j in rows_r:
        A[eq, site] = 1.0
        if from_left:    # t e^{ikj}
            A[eq, t_col] = -cmath.exp(1j * k * j)
        else:            # e^{-ikj} + r e^{ikj}
            A[eq, r_col] = -cmath.exp(1j * k * j)
            b[eq] = cmath.exp(-1j * k * j)
        eq += 1
    if np.linalg.cond(A) > 1e12:
        raise SingularSystem(f"scattering system singular at k = {k}")
    x = np.linalg.solve(A, b)
    return x[t_col], x[r_col]


def numeric_scattering_oracle(system: str, gamma: float, k: float, phi: float = 0.0,
                              n_lead: int = 50) -> ScatteringResult:
    """Scattering coefficients from an explicit finite lead-trimer-lead lattice.

    The plane-wave ansatz is imposed on the two outermost sites of each lead
    and the Schroedinger equation on every other site, so the solution is
    independent of the closed forms. The complex coefficients follow the
    lattice site numbering and may differ from the closed forms by a phase;
    the probabilities are convention independent.
    """
    if n_lead < 50:
        raise ValueError("n_lead must be at least 50")
    if system not in ("chain", "ring"):
        raise ValueError(f"unknown system {system!r}")
    _check_k(k)
    H = _lead_trimer_matrix(system, gamma, phi, n_lead)
    tl, rl = _solve_side(H, n_lead, k, True)
    tr, rr = _solve_side(H, n_lead, k, False)
    return ScatteringResult.from_coefficients(k, tl, tr, rl, rr)

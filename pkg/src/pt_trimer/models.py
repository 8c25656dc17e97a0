"""Chain and ring trimer Hamiltonians and their symmetry checks.

Basis order is site 1 (gain, +i gamma), site 2 (neutral), site 3 (loss).
Couplings enter with explicit minus signs. Energies are in units of the
chain coupling kappa unless stated otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import CubicCoefficients

TWO_PI = 2.0 * math.pi

#: parity: mirror of the three sites
PARITY = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)
#: chiral operator, S a_j S^-1 = (-1)^j a_{4-j}
CHIRAL = np.array([[0, 0, -1], [0, 1, 0], [-1, 0, 0]], dtype=complex)

SYMMETRY_TOL = 1e-12


class Boundary(str, Enum):
    CHAIN = "chain"
    RING = "ring"


@dataclass(frozen=True)
class TrimerParams:
    """Physical configuration of a trimer.

    For a chain the ring closure ``j_coupling`` and ``flux`` are ignored and
    stored as zero; ``flux`` is always reduced into ``[0, 2 pi)``. Negative
    couplings are accepted (they are gauge-equivalent to flux shifts).
    """

    kappa: float = 1.0
    gamma: float = 0.0
    j_coupling: float = 0.0
    flux: float = 0.0
    boundary: Boundary = Boundary.CHAIN

    def __post_init__(self):
        boundary = Boundary(self.boundary)
        object.__setattr__(self, "boundary", boundary)
        for name in ("kappa", "gamma", "j_coupling", "flux"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if boundary is Boundary.CHAIN:
            object.__setattr__(self, "j_coupling", 0.0)
            object.__setattr__(self, "flux", 0.0)
        else:
            object.__setattr__(self, "flux", self.flux % TWO_PI)

    @classmethod
    def chain(cls, kappa: float = 1.0, gamma: float = 0.0) -> "TrimerParams":
        return cls(kappa=kappa, gamma=gamma, boundary=Boundary.CHAIN)

    @classmethod
    def ring(cls, kappa: float = 1.0, j: float = 1.0, gamma: float = 0.0,
             flux: float = 0.0) -> "TrimerParams":
        return cls(kappa=kappa, gamma=gamma, j_coupling=j, flux=flux,
                   boundary=Boundary.RING)

    def replace(self, **changes) -> "TrimerParams":
        fields = dict(kappa=self.kappa, gamma=self.gamma, j_coupling=self.j_coupling,
                      flux=self.flux, boundary=self.boundary)
        fields.update(changes)
        return TrimerParams(**fields)

    def as_dict(self) -> dict:
        return {"boundary": self.boundary.value, "kappa": self.kappa,
                "j": self.j_coupling, "gamma": self.gamma, "phi": self.flux}


def build_hamiltonian(params: TrimerParams) -> np.ndarray:
    k, g = params.kappa, params.gamma
    H = np.array([[1j * g, -k, 0.0],
                  [-k, 0.0, -k],
                  [0.0, -k, -1j * g]], dtype=complex)
    if params.boundary is Boundary.RING:
        phase = complex(math.cos(params.flux), math.sin(params.flux))
        H[0, 2] = -params.j_coupling * phase
        H[2, 0] = -params.j_coupling * phase.conjugate()
    return H


def cubic_coefficients(params: TrimerParams) -> CubicCoefficients:
    """Closed-form ``p = gamma^2 - J^2 - 2 kappa^2``, ``q = 2 J kappa^2 cos(flux)``."""
    k2 = params.kappa ** 2
    J = params.j_coupling
    p = params.gamma ** 2 - J ** 2 - 2.0 * k2
    q = 2.0 * J * k2 * math.cos(params.flux)
    return CubicCoefficients(p, q)


@dataclass(frozen=True)
class SymmetryReport:
    pt_symmetric: bool
    chiral_symmetric: bool
    pt_residual: float
    chiral_residual: float


def check_symmetries(H) -> SymmetryReport:
    """PT residual ``|P conj(H) P^-1 - H|`` and chiral residual ``|S H S^-1 + H|`` (max-norm)."""
    H = np.asarray(H, dtype=complex)
    pt = float(np.max(np.abs(PARITY @ H.conj() @ PARITY - H)))
    # S is real, symmetric and its own inverse
    chiral = float(np.max(np.abs(CHIRAL @ H @ CHIRAL + H)))
    return SymmetryReport(pt <= SYMMETRY_TOL, chiral <= SYMMETRY_TOL, pt, chiral)


def gauge_transform(H, phases) -> np.ndarray:
    """``D^-1 H D`` with ``D = diag(exp(i theta_j))``; a similarity, so the spectrum is kept.

    For the ring, ``phases = (flux, 0, 0)`` strips the ``exp(+-i flux)`` factors
    from the 1-3 coupling.
    """
    d = np.exp(1j * np.asarray(phases, dtype=float))
    H = np.asarray(H, dtype=complex)
    return (d.conj()[:, None] * H) * d[None, :]

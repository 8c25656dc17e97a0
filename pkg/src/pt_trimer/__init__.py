"""Spectra, exceptional-point dynamics and scattering of PT-symmetric trimers."""
from .errors import PhysicsError
from .linalg import SpectralDecomposition, eig3, solve_depressed_cubic
from .models import Boundary, TrimerParams, build_hamiltonian, check_symmetries
from .spectral import (PhaseKind, PhaseLabel, classify_phase, critical_gamma_ep2,
                       critical_gamma_ep3, phase_diagram)
from .dynamics import growth_order, propagate_analytic, propagate_numeric
from .scattering import chain_scattering, emission_contrast, ring_scattering
from .lattice import LatticeConfig, Packet, evolve_lattice, gaussian_packet, measure_platform

__version__ = "0.1.0"

__all__ = [
    "Boundary", "LatticeConfig", "Packet", "PhaseKind", "PhaseLabel", "PhysicsError",
    "SpectralDecomposition", "TrimerParams", "build_hamiltonian", "chain_scattering",
    "check_symmetries", "classify_phase", "critical_gamma_ep2", "critical_gamma_ep3",
    "eig3", "emission_contrast", "evolve_lattice", "gaussian_packet", "growth_order",
    "measure_platform", "phase_diagram", "propagate_analytic", "propagate_numeric",
    "ring_scattering", "solve_depressed_cubic", "__version__",
]

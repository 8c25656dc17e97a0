"""Phase classification, exceptional-point location and parameter sweeps."""
from __future__ import annotations

import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .errors import NegativeRadicand
from .linalg import DEFAULT_TOL, discriminant_distance, eig3, solve_depressed_cubic
from .models import Boundary, TrimerParams, build_hamiltonian, cubic_coefficients


class PhaseKind(str, Enum):
    EXACT = "exact"
    BROKEN = "broken"
    EP2 = "ep2"
    EP3 = "ep3"


@dataclass(frozen=True)
class PhaseLabel:
    kind: PhaseKind
    coalesced_energy: Optional[complex]
    discriminant: float
    eigenvalues: np.ndarray

    @property
    def at_ep(self) -> bool:
        return self.kind in (PhaseKind.EP2, PhaseKind.EP3)


def classify_phase(params: TrimerParams, tol: float = DEFAULT_TOL) -> PhaseLabel:
    """Label a configuration exact / broken / EP2 / EP3.

    The sign of the cubic discriminant decides away from degeneracies. Within
    ``tol`` of a degenerate spectrum (both cubic coefficients small, or a small
    distance to the discriminant surface) the Jordan structure of the
    Hamiltonian decides: a block of size 3 is an EP3, of size 2 an EP2, and a
    degenerate but diagonalizable spectrum (Hermitian-style degeneracy) is
    exact.
    """
    cubic = cubic_coefficients(params)
    p, q = float(np.real(cubic.p)), float(np.real(cubic.q))
    disc = -4.0 * p ** 3 - 27.0 * q ** 2
    near_triple = abs(p) <= tol and abs(q) <= tol
    if near_triple or discriminant_distance(p, q) <= tol:
        decomp = eig3(build_hamiltonian(params), tol)
        largest = max(size for _, size in decomp.jordan_blocks)
        if largest == 3:
            return PhaseLabel(PhaseKind.EP3, 0j, disc, np.zeros(3, dtype=complex))
        if largest == 2:
            energy = next(E for E, size in decomp.jordan_blocks if size == 2)
            return PhaseLabel(PhaseKind.EP2, complex(energy), disc, decomp.eigenvalues)
        roots = decomp.eigenvalues
        kind = PhaseKind.EXACT if np.all(np.abs(roots.imag) <= tol) else PhaseKind.BROKEN
        return PhaseLabel(kind, None, disc, roots)
    roots = solve_depressed_cubic(p, q)
    kind = PhaseKind.EXACT if disc > 0 else PhaseKind.BROKEN
    return PhaseLabel(kind, None, disc, roots)


def critical_gamma_ep2(kappa: float, j: float, phi: float) -> float:
    """Balanced gain/loss at which the ring sits on its EP2 (EP3 when cos(phi) = 0)."""
    k2 = kappa * kappa
    c = math.cos(phi)
    if abs(c) <= 4.0 * sys.float_info.epsilon:
        c = 0.0     # cos(pi/2) rounds to ~6e-17, which the 2/3 power would inflate to ~1e-11
    radicand = 2.0 * k2 + j * j - 3.0 * abs(j * k2 * c) ** (2.0 / 3.0)
    if radicand < 0.0:
        # AM-GM makes the exact radicand non-negative; clamp rounding noise only
        if radicand < -1e-12 * max(1.0, 2.0 * k2 + j * j):
            raise NegativeRadicand(radicand)
        radicand = 0.0
    return math.sqrt(radicand)


def critical_gamma_ep3(kappa: float, j: float = 0.0,
                       boundary: Union[Boundary, str] = Boundary.CHAIN) -> float:
    if Boundary(boundary) is Boundary.CHAIN:
        return math.sqrt(2.0) * abs(kappa)
    return math.sqrt(j * j + 2.0 * kappa * kappa)


AXIS_FIELDS = {"kappa": "kappa", "gamma": "gamma", "j": "j_coupling", "phi": "flux"}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    samples: int

    def __post_init__(self):
        if self.name not in AXIS_FIELDS:
            raise ValueError(f"unknown sweep parameter {self.name!r}; choose from {sorted(AXIS_FIELDS)}")
        if self.samples < 2:
            raise ValueError("an axis needs at least 2 samples")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("axis bounds must be finite")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.samples)

    @classmethod
    def parse(cls, text: str, number: Callable[[str], float] = float) -> "Axis":
        """``name:start:stop:samples``, e.g. ``kappa:0:2:201``."""
        try:
            name, start, stop, samples = text.split(":")
        except ValueError:
            raise ValueError(f"axis spec {text!r} is not name:start:stop:samples") from None
        return cls(name, number(start), number(stop), int(samples))


@dataclass
class PhaseDiagramGrid:
    axes: tuple
    fixed: TrimerParams
    labels: np.ndarray          # str PhaseKind values, shape (n0, n1)
    discriminant: np.ndarray
    energies: np.ndarray        # (n0, n1, 3)

    def node_values(self, i: int, j: int) -> dict:
        """Raw (un-normalized) parameter values at grid node ``(i, j)``."""
        values = {"kappa": self.fixed.kappa, "gamma": self.fixed.gamma,
                  "j": self.fixed.j_coupling, "phi": self.fixed.flux}
        values[self.axes[0].name] = float(self.axes[0].values[i])
        values[self.axes[1].name] = float(self.axes[1].values[j])
        return values

    def mask(self, kind: PhaseKind) -> np.ndarray:
        return self.labels == PhaseKind(kind).value


def _node_params(fixed: TrimerParams, names, values) -> TrimerParams:
    return fixed.replace(**{AXIS_FIELDS[n]: v for n, v in zip(names, values)})


def _classify_row(args):
    fixed, axes, i, tol = args
    x = axes[0].values[i]
    names = (axes[0].name, axes[1].name)
    out = []
    for y in axes[1].values:
        label = classify_phase(_node_params(fixed, names, (x, y)), tol)
        out.append((label.kind.value, label.discriminant, label.eigenvalues))
    return out


def phase_diagram(axes, fixed: TrimerParams, tol: float = DEFAULT_TOL,
                  workers: int = 1) -> PhaseDiagramGrid:
    """Classify every node of a 2D parameter grid.

    Nodes are independent; with ``workers > 1`` rows are farmed out to a
    process pool. The output is row-major in ``axes[0]`` whatever the
    execution order.
    """
    axes = tuple(axes)
    if len(axes) != 2 or axes[0].name == axes[1].name:
        raise ValueError("phase_diagram needs two distinct axes")
    if fixed.boundary is Boundary.CHAIN and any(a.name in ("j", "phi") for a in axes):
        raise ValueError("j and phi are not parameters of the chain")
    tasks = [(fixed, axes, i, tol) for i in range(axes[0].samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_classify_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_classify_row(t) for t in tasks]
    n0, n1 = axes[0].samples, axes[1].samples
    labels = np.empty((n0, n1), dtype="<U6")
    disc = np.empty((n0, n1))
    energies = np.empty((n0, n1, 3), dtype=complex)
    for i, row in enumerate(rows):
        for j, (kind, d, e) in enumerate(row):
            labels[i, j] = kind
            disc[i, j] = d
            energies[i, j] = e
    return PhaseDiagramGrid(axes, fixed, labels, disc, energies)


@dataclass
class BandTable:
    phis: np.ndarray
    energies: np.ndarray    # (samples, 3), continuity ordered
    params: list


def _continuity_order(prev: np.ndarray, current: np.ndarray) -> np.ndarray:
    best = min(itertools.permutations(range(3)),
               key=lambda perm: float(np.sum(np.abs(current[list(perm)] - prev))))
    return current[list(best)]


def band_sweep(params: Union[TrimerParams, Callable[[float], TrimerParams]], samples: int,
               phi_min: float = 0.0, phi_max: float = 2.0 * math.pi,
               tol: float = DEFAULT_TOL) -> BandTable:
    """Ring spectrum along a flux sweep.

    ``params`` is either a fixed ring configuration (only the flux is swept)
    or a callable mapping the flux to a configuration, for sweeps where other
    couplings follow the flux. Each row is matched to the previous one by the
    permutation of minimal total distance so bands stay continuous.
    Energies within ``tol`` of an exceptional point are snapped as in
    :func:`classify_phase`.
    """
    if samples < 2:
        raise ValueError("band_sweep needs at least 2 samples")
    if isinstance(params, TrimerParams):
        fixed = params
        make = lambda phi: fixed.replace(flux=phi, boundary=Boundary.RING)  # noqa: E731
    else:
        make = params
    phis = np.linspace(phi_min, phi_max, samples)
    rows, plist = [], []
    for phi in phis:
        pr = make(float(phi))
        roots = np.asarray(classify_phase(pr, tol).eigenvalues, dtype=complex)
        rows.append(roots if not rows else _continuity_order(rows[-1], roots))
        plist.append(pr)
    return BandTable(phis, np.array(rows), plist)

"""Exact and numeric kernels for 3x3 complex matrices.

Cubic roots, eigen/Jordan decomposition with snapping of near-degenerate
spectra onto exceptional points, and the Jordan-form propagator
``V exp(-i h t) V^-1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChainBreak

#: Default clustering / rank tolerance, absolute in kappa = 1 units.
DEFAULT_TOL = 1e-9

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class CubicCoefficients:
    """Depressed cubic ``E^3 + p E + q = 0``."""

    p: complex
    q: complex

    @property
    def discriminant(self) -> complex:
        return discriminant(self.p, self.q)

    def roots(self) -> np.ndarray:
        if _is_real(self.p) and _is_real(self.q):
            return solve_depressed_cubic(float(np.real(self.p)), float(np.real(self.q)))
        return _solve_complex_depressed(complex(self.p), complex(self.q))


def discriminant(p, q):
    """``-4 p^3 - 27 q^2``: positive for three distinct real roots."""
    return -4.0 * p ** 3 - 27.0 * q ** 2


def discriminant_distance(p, q) -> float:
    """First-order distance in the (p, q) plane to the surface ``discriminant = 0``.

    Unlike the raw discriminant this is linear in a parameter perturbation
    near a double root, so an absolute tolerance on it means the same thing
    for every coupling scale.
    """
    d = abs(discriminant(p, q))
    if d == 0.0:
        return 0.0
    grad = math.hypot(abs(12.0 * p * p), abs(54.0 * q))
    if grad == 0.0:
        return 0.0
    return d / grad


def _is_real(z, rtol: float = 1e-13) -> bool:
    z = complex(z)
    return abs(z.imag) <= rtol * max(1.0, abs(z.real))


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _sort_roots(roots) -> np.ndarray:
    return np.array(sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag)))


def _polish_real(x: float, p: float, q: float) -> float:
    # one guarded Newton step; tiny steps only, so a double root stays put
    fp = 3.0 * x * x + p
    if fp == 0.0:
        return x
    step = (x ** 3 + p * x + q) / fp
    if abs(step) > 1e-8 * max(1.0, abs(x)):
        return x
    nx = x - step
    return nx if abs(nx ** 3 + p * nx + q) < abs(x ** 3 + p * x + q) else x


def solve_depressed_cubic(p: float, q: float) -> np.ndarray:
    """The three roots of ``E^3 + p E + q = 0`` for real ``p``, ``q``.

    For a non-negative discriminant the trigonometric branch is used, so the
    roots come back with an imaginary part of exactly zero. Otherwise Cardano's
    real root is Newton-polished and the remaining pair is built from it as an
    exact complex-conjugate pair.

    Returns
    -------
    numpy.ndarray
        Complex array of shape (3,), sorted by real then imaginary part.
    """
    p = float(p)
    q = float(q)
    if not (math.isfinite(p) and math.isfinite(q)):
        raise ValueError("cubic coefficients must be finite")
    scale = max(math.sqrt(abs(p)), abs(q) ** (1.0 / 3.0))
    if scale == 0.0:
        return np.zeros(3, dtype=complex)
    if not 1e-50 < scale < 1e50:
        # E -> scale * E keeps p^3 and q^2 clear of under/overflow
        return scale * solve_depressed_cubic(p / scale / scale, q / scale / scale / scale)
    delta = -4.0 * p ** 3 - 27.0 * q ** 2
    if delta >= 0.0:
        if p == 0.0:
            return np.zeros(3, dtype=complex)
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        roots = [_polish_real(m * math.cos(theta - 2.0 * math.pi * n / 3.0), p, q)
                 for n in range(3)]
        return _sort_roots(complex(r, 0.0) for r in roots)

    half_disc = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    w = -q / 2.0 + math.copysign(half_disc, -q)
    u = _cbrt(w)
    x = _polish_real(u - p / (3.0 * u), p, q)
    im = math.sqrt(max(0.0, p + 0.75 * x * x))
    return _sort_roots([complex(x, 0.0), complex(-x / 2.0, im), complex(-x / 2.0, -im)])


def _solve_complex_depressed(p: complex, q: complex) -> np.ndarray:
    if p == 0 and q == 0:
        return np.zeros(3, dtype=complex)
    d = cmath.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    w = -q / 2.0 + d
    if abs(-q / 2.0 - d) > abs(w):
        w = -q / 2.0 - d
    u = w ** (1.0 / 3.0)
    omega = complex(-0.5, _SQRT3 / 2.0)
    roots = []
    for n in range(3):
        un = u * omega ** n
        x = un - p / (3.0 * un)
        for _ in range(2):
            fp = 3.0 * x * x + p
            if fp == 0:
                break
            nx = x - (x ** 3 + p * x + q) / fp
            if abs(nx ** 3 + p * nx + q) >= abs(x ** 3 + p * x + q):
                break
            x = nx
        roots.append(x)
    return _sort_roots(roots)


def characteristic_coefficients(H) -> tuple[complex, complex, complex]:
    """``(c2, c1, c0)`` with ``det(E I - H) = E^3 + c2 E^2 + c1 E + c0``."""
    H = np.asarray(H, dtype=complex)
    tr = H[0, 0] + H[1, 1] + H[2, 2]
    minors = (
        H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
        + H[0, 0] * H[2, 2] - H[0, 2] * H[2, 0]
        + H[1, 1] * H[2, 2] - H[1, 2] * H[2, 1]
    )
    det = (
        H[0, 0] * (H[1, 1] * H[2, 2] - H[1, 2] * H[2, 1])
        - H[0, 1] * (H[1, 0] * H[2, 2] - H[1, 2] * H[2, 0])
        + H[0, 2] * (H[1, 0] * H[2, 1] - H[1, 1] * H[2, 0])
    )
    return complex(-tr), complex(minors), complex(-det)


def depressed_form(H) -> tuple[CubicCoefficients, complex]:
    """Depressed cubic of ``H`` and the shift ``trace(H)/3`` removed from it."""
    c2, c1, c0 = characteristic_coefficients(H)
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    return CubicCoefficients(p, q), -c2 / 3.0


@dataclass(frozen=True)
class SpectralDecomposition:
    """``H = V h V^-1`` with ``h`` in Jordan normal form.

    ``jordan_blocks`` lists ``(eigenvalue, size)``; the columns of
    ``similarity`` are, block by block, the eigenvector followed by its
    generalized (associated) vectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: tuple
    jordan_blocks: tuple
    generalized_vectors: tuple
    similarity: np.ndarray
    similarity_inv: np.ndarray
    canonical: np.ndarray

    @property
    def diagonalizable(self) -> bool:
        return all(size == 1 for _, size in self.jordan_blocks)

    @property
    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for _, size in self.jordan_blocks:
            out.append(slice(start, start + size))
            start += size
        return out

    def reconstruct(self) -> np.ndarray:
        return self.similarity @ self.canonical @ self.similarity_inv

    def coordinates(self, psi) -> np.ndarray:
        """Jordan coordinates ``c = V^-1 psi``."""
        return self.similarity_inv @ np.asarray(psi, dtype=complex)


def normalize_phase(v) -> np.ndarray:
    """Unit Euclidean norm with the first nonzero component real-positive."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-10 * mags.max()))
    return v * (abs(v[idx]) / v[idx])


def _null_rows(N, tol):
    _, s, vh = np.linalg.svd(N)
    smax = s[0]
    if smax == 0.0:
        nullity = 3
    else:
        nullity = int(np.sum(s <= tol * smax))
    return nullity, vh


def jordan_chain(H, E, v0, length: int, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Generalized vectors ``v1 .. v_{length-1}`` above the eigenvector ``v0``.

    Each ``v_i`` is the minimal-norm solution of ``(H - E I) v_i = v_{i-1}``
    (SVD least squares truncated at ``tol`` relative to the largest singular
    value).

    Raises
    ------
    ChainBreak
        The system is inconsistent, i.e. the requested block is larger than
        the true one.
    """
    H = np.asarray(H, dtype=complex)
    N = H - E * np.eye(3)
    chain_tol = math.sqrt(tol)
    vectors = [np.asarray(v0, dtype=complex)]
    for _ in range(length - 1):
        prev = vectors[-1]
        v, *_ = np.linalg.lstsq(N, prev, rcond=tol)
        resid = np.linalg.norm(N @ v - prev)
        if resid > chain_tol * np.linalg.norm(prev):
            raise ChainBreak(f"chain residual {resid:.3g} at E={complex(E):.6g}")
        vectors.append(v)
    if len(vectors) > 1:
        s = np.linalg.svd(np.column_stack(vectors), compute_uv=False)
        if s[-1] <= tol * s[0]:
            raise ChainBreak("chain vectors are linearly dependent")
    return vectors[1:]


def _clusters(H, tol, snap):
    cubic, shift = depressed_form(H)
    p, q = cubic.p, cubic.q
    roots = cubic.roots()
    scale_p = abs(p)
    if snap and scale_p <= tol and abs(q) <= tol:
        return [(shift, 3)]
    if snap and discriminant_distance(p, q) <= tol and scale_p > 0:
        double = -1.5 * q / p
        simple = roots[np.argmin(np.abs(roots + 2.0 * double))]
        return [(simple + shift, 1), (double + shift, 2)]
    roots = roots + shift
    if not snap:
        return [(r, 1) for r in roots]
    # merge whatever the discriminant test missed (e.g. non-real p, q)
    groups: list[list[complex]] = []
    for r in roots:
        for g in groups:
            if any(abs(r - x) <= tol for x in g):
                g.append(r)
                break
        else:
            groups.append([r])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def eig3(H, tol: float = DEFAULT_TOL, snap: bool = True) -> SpectralDecomposition:
    """Eigen/Jordan decomposition of a 3x3 complex matrix.

    Eigenvalues come from the characteristic cubic. With ``snap`` (default)
    inputs within ``tol`` of a degenerate spectrum are treated as degenerate
    and the Jordan structure is read off the numeric rank of ``H - E I``;
    ``snap=False`` forces a plain diagonalization.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (3, 3) or not np.all(np.isfinite(H)):
        raise ValueError("eig3 expects a finite 3x3 matrix")
    blocks = []  # (E, size, [v0, v1, ...])
    for E, mult in _clusters(H, tol, snap):
        E = complex(E)
        N = H - E * np.eye(3)
        nullity, vh = _null_rows(N, tol)
        nullity = min(max(nullity, 1), mult)
        if mult == 1:
            blocks.append((E, 1, [normalize_phase(vh[-1].conj())]))
        elif nullity == mult:
            for row in vh[3 - mult:]:
                blocks.append((E, 1, [normalize_phase(row.conj())]))
        elif nullity == 1:
            v0 = normalize_phase(vh[-1].conj())
            blocks.append((E, mult, [v0, *jordan_chain(H, E, v0, mult, tol)]))
        else:
            # triple eigenvalue with blocks (2, 1): chain head must lie in range(N)
            v0 = normalize_phase(N @ vh[0].conj())
            chain = [v0, *jordan_chain(H, E, v0, 2, tol)]
            null = [row.conj() for row in vh[1:]]
            cands = [z - np.vdot(v0, z) * v0 for z in null]
            other = max(cands, key=np.linalg.norm)
            blocks.append((E, 1, [normalize_phase(other)]))
            blocks.append((E, 2, chain))
    blocks.sort(key=lambda b: (b[0].real, b[0].imag, b[1]))

    cols, h = [], np.zeros((3, 3), dtype=complex)
    start = 0
    for E, size, vecs in blocks:
        cols.extend(vecs)
        for i in range(size):
            h[start + i, start + i] = E
            if i + 1 < size:
                h[start + i, start + i + 1] = 1.0
        start += size
    V = np.column_stack(cols)
    eigenvalues = _sort_roots(E for E, size, _ in blocks for _ in range(size))
    return SpectralDecomposition(
        eigenvalues=eigenvalues,
        eigenvectors=tuple(vecs[0] for _, _, vecs in blocks),
        jordan_blocks=tuple((E, size) for E, size, _ in blocks),
        generalized_vectors=tuple(tuple(vecs[1:]) for _, _, vecs in blocks),
        similarity=V,
        similarity_inv=np.linalg.inv(V),
        canonical=h,
    )


def jordan_block_exp(eigenvalue: complex, size: int, t: float) -> np.ndarray:
    """``exp(-i J t)`` for a single Jordan block ``J`` of the given size."""
    out = np.zeros((size, size), dtype=complex)
    term = 1.0 + 0j
    for k in range(size):
        # (-i t)^k / k! on the k-th superdiagonal
        idx = np.arange(size - k)
        out[idx, idx + k] = term
        term *= -1j * t / (k + 1)
    return cmath.exp(-1j * eigenvalue * t) * out


def propagator(decomp: SpectralDecomposition, t: float) -> np.ndarray:
    """``U(t) = V exp(-i h t) V^-1``."""
    e = np.zeros((3, 3), dtype=complex)
    for (E, size), sl in zip(decomp.jordan_blocks, decomp.block_slices):
        e[sl, sl] = jordan_block_exp(E, size, t)
    return decomp.similarity @ e @ decomp.similarity_inv

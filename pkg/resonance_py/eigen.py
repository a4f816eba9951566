"""
Dense non-Hermitian eigensolves and contour-integral spectral projectors.
"""

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import scipy.linalg

from .assembly import OperatorMatrix
from .errors import ContourError, SingularSystemError, SolverError

logger = logging.getLogger(__name__)

MAX_DENSE_SIZE = 4096
RESIDUAL_LIMIT = 1e-8

Matrix = Union[OperatorMatrix, np.ndarray]


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    residuals: Optional[np.ndarray] = None
    vectors: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


@dataclass
class ProjectorRank:
    center: complex
    radius: float
    rank: int
    singular_values: List[float]
    enclosed: Optional[int] = None


def _entries(A: Matrix) -> np.ndarray:
    return A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)


def eig(A: Matrix, want_vectors: bool = False) -> EigenDecomposition:
    """
    All eigenvalues through LAPACK's Hessenberg reduction and shifted QR
    (zgeev), optionally with right eigenvectors and their residuals.
    """
    M = _entries(A).astype(complex, copy=False)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise SolverError(f"eigensolve needs a square matrix, got shape {M.shape}")
    if n > MAX_DENSE_SIZE:
        raise SolverError(f"N={n} exceeds the dense bound {MAX_DENSE_SIZE}")
    if not np.all(np.isfinite(M)):
        raise SolverError("matrix has non-finite entries")

    start = time.time()
    try:
        if want_vectors:
            values, vectors = scipy.linalg.eig(M, right=True, check_finite=False)
        else:
            values = scipy.linalg.eigvals(M, check_finite=False)
            vectors = None
    except scipy.linalg.LinAlgError as e:
        raise SolverError(f"QR iteration did not converge for N={n}: {e}")
    elapsed_ms = int((time.time() - start) * 1000)

    residuals = None
    meta = {'N': n, 'solver': 'zgeev', 'elapsed_ms': elapsed_ms}
    if vectors is not None:
        norms = np.linalg.norm(vectors, axis=0)
        residuals = np.linalg.norm(M @ vectors - vectors * values, axis=0) / norms
        meta['max_residual'] = float(np.max(residuals)) if n else 0.0
        if n and meta['max_residual'] > RESIDUAL_LIMIT:
            logger.warning(f"Eigenpair residual {meta['max_residual']:.2e} above {RESIDUAL_LIMIT}")

    logger.info(f"Eigensolve N={n} finished in {elapsed_ms}ms")
    return EigenDecomposition(eigenvalues=values, residuals=residuals, vectors=vectors, meta=meta)


def count_in_disc(eigenvalues, center: complex, radius: float) -> int:
    return int(np.sum(np.abs(np.asarray(eigenvalues) - center) <= radius))


def _contour_nodes(center: complex, radius: float, points: int):
    angles = 2.0 * math.pi * np.arange(points) / points
    zeta = center + radius * np.exp(1j * angles)
    # (1/2 pi i) dzeta = radius e^{i phi} dphi / (2 pi), trapezoid on the circle
    weights = radius * np.exp(1j * angles) / points
    return zeta, weights


def _resolvent_solve(M: np.ndarray, zeta: complex, block: np.ndarray) -> np.ndarray:
    """(zeta - M)^{-1} block by LU with partial pivoting."""
    shifted = zeta * np.eye(M.shape[0]) - M
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(shifted, check_finite=False)
        solution = scipy.linalg.lu_solve(lu, block, check_finite=False)
    except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        raise SingularSystemError(f"resolvent solve failed at zeta={zeta:.6g}: {e}")
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError(f"resolvent solve produced non-finite values at zeta={zeta:.6g}")
    return solution


def contour_projector(A: Matrix, center: complex, radius: float, points: int = 64,
                      block: Optional[np.ndarray] = None,
                      max_workers: int = 1) -> np.ndarray:
    """
    Trapezoid approximation of (1/2 pi i) oint (zeta - A)^{-1} dzeta, applied to
    `block` (the identity when omitted, giving the full Riesz projector).
    """
    M = _entries(A).astype(complex, copy=False)
    if block is None:
        block = np.eye(M.shape[0], dtype=complex)
    zeta, weights = _contour_nodes(center, radius, points)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        solutions = list(pool.map(lambda z: _resolvent_solve(M, z, block), zeta))

    projected = np.zeros_like(block, dtype=complex)
    for w, solution in zip(weights, solutions):
        projected += w * solution
    return projected


def projector_rank(A: Matrix, center: complex, radius: float, M: int = 64,
                   tol: float = 1e-6, eigenvalues=None, guard: float = 1e-6,
                   sketch: int = 24, seed: int = 1234,
                   max_workers: int = 1) -> ProjectorRank:
    """
    Algebraic multiplicity inside the circle |zeta - center| = radius as the
    rank of the Riesz projector.

    For N > sketch the projector is applied to a seeded orthonormal Gaussian
    block; rank(Pi Y) = rank(Pi) for generic Y. Singular values count when
    above tol * max(1, sigma_max); a nonzero projector has norm >= 1.
    """
    if not radius > 0:
        raise ContourError(f"contour radius must be positive, got {radius}")
    entries = _entries(A)
    n = entries.shape[0]
    if eigenvalues is None:
        eigenvalues = eig(entries).eigenvalues
    eigenvalues = np.asarray(eigenvalues)

    gap = np.abs(np.abs(eigenvalues - center) - radius)
    close = gap < guard * radius
    if np.any(close):
        worst = eigenvalues[np.argmin(gap)]
        raise ContourError(
            f"eigenvalue {worst:.10g} lies within {guard:g}*radius of the contour "
            f"|z - ({center:.6g})| = {radius:.6g}; pick a different radius"
        )

    if n <= sketch:
        block = np.eye(n, dtype=complex)
    else:
        rng = np.random.default_rng(seed)
        gauss = rng.standard_normal((n, sketch)) + 1j * rng.standard_normal((n, sketch))
        block, _ = np.linalg.qr(gauss)

    projected = contour_projector(entries, center, radius, M, block, max_workers)
    singular = np.linalg.svd(projected, compute_uv=False)
    threshold = tol * max(1.0, float(singular[0]) if singular.size else 0.0)
    rank = int(np.sum(singular > threshold))

    enclosed = count_in_disc(eigenvalues, center, radius)
    logger.debug(
        f"Projector rank at {center:.6g} (r={radius:.3g}): rank={rank}, "
        f"enclosed eigenvalues={enclosed}, sigma_max={singular[0] if singular.size else 0:.3g}"
    )
    return ProjectorRank(
        center=complex(center),
        radius=float(radius),
        rank=rank,
        singular_values=[float(s) for s in singular],
        enclosed=enclosed,
    )

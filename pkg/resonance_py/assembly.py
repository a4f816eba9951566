"""
Dense discretization of the distorted CAP operator

    (xi + theta sin(pi xi))^2 + V_theta - i eps D (1 + pi theta cos(pi xi))^-2 D - i eps r_theta

on a truncated uniform xi-grid with Dirichlet ends.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distortion import dphi, check_theta, phi, r_theta
from .errors import ParameterError
from .grid import GridSpec, require_band_fit
from .potentials import KernelEvaluator, PotentialFamily, PotentialSpec, zero

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    grid: GridSpec
    theta: complex
    epsilon: float
    spec: PotentialSpec

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def hermitian_defect(self) -> float:
        """max |A - A*| relative to max |A|."""
        A = self.entries
        scale = max(float(np.max(np.abs(A))), 1e-300)
        return float(np.max(np.abs(A - A.conj().T))) / scale


def derivative_matrix(grid: GridSpec) -> np.ndarray:
    """
    First differences centered at the cell midpoints, (N+1) x N.

    Row j is (u_j - u_{j-1}) / dxi with the ghost values u_{-1} = u_N = 0,
    so D^T diag(m) D is the compact three-point operator with Dirichlet ends.
    """
    n = grid.N
    D = np.zeros((n + 1, n))
    idx = np.arange(n)
    D[idx, idx] = 1.0
    D[idx + 1, idx] = -1.0
    return D / grid.dxi


def viscosity_block(theta: complex, grid: GridSpec) -> np.ndarray:
    """D^T diag(Phi'(xi_{j-1/2})^-2) D, tridiagonal, complex symmetric."""
    m = dphi(theta, grid.midpoints) ** -2
    D = derivative_matrix(grid)
    return D.T @ (m[:, None] * D)


def _free_diagonal(theta: complex, epsilon: float, grid: GridSpec) -> np.ndarray:
    xi = grid.points
    return phi(theta, xi) ** 2 - 1j * epsilon * r_theta(theta, xi)


def assemble_free(theta: complex, epsilon: float, grid: GridSpec) -> OperatorMatrix:
    """Distorted free Hamiltonian Q_{eps,theta}."""
    return assemble(zero(), theta, epsilon, grid)


def assemble(spec: PotentialSpec, theta: complex, epsilon: float,
             grid: GridSpec) -> OperatorMatrix:
    """
    Assemble P_{eps,theta} on the grid.

    The convolution block carries symmetric trapezoid weights
    K_ij sqrt(w_i w_j); this is diag(sqrt w) (K w) diag(sqrt w)^-1, so the
    spectrum is that of the plain Nystrom matrix K_ij w_j.
    """
    theta = check_theta(theta, spec.K)
    if epsilon < 0:
        raise ParameterError(f"epsilon must be nonnegative, got {epsilon}")
    if spec.family is not PotentialFamily.ZERO:
        require_band_fit(grid)
    start = time.time()

    A = np.diag(_free_diagonal(theta, epsilon, grid).astype(complex))
    if epsilon > 0:
        A = A - 1j * epsilon * viscosity_block(theta, grid)
    if spec.family is not PotentialFamily.ZERO:
        sw = np.sqrt(grid.weights)
        A = A + KernelEvaluator(spec, theta).matrix(grid) * np.outer(sw, sw)

    logger.info(
        f"Assembled {grid.N}x{grid.N} operator: family={spec.family.value}, "
        f"theta={theta:.4g}, eps={epsilon:.3g} in {(time.time() - start) * 1000:.0f}ms"
    )
    return OperatorMatrix(entries=A, grid=grid, theta=theta, epsilon=float(epsilon), spec=spec)


def richardson(coarse, fine, order: int = 2) -> np.ndarray:
    """Cancel the dxi^order error term between spacing h and h/2."""
    factor = 2.0 ** order
    return (factor * np.asarray(fine) - np.asarray(coarse)) / (factor - 1.0)


def nearest(values: np.ndarray, targets: Sequence[complex]) -> np.ndarray:
    values = np.asarray(values)
    return np.array([values[np.argmin(np.abs(values - t))] for t in targets])


def refine_eigenvalues(build: Callable[[GridSpec], np.ndarray], grid: GridSpec,
                       targets: Sequence[complex],
                       levels: int = 2) -> dict:
    """
    Eigenvalues nearest `targets` on nested grids N, 2N-1, ... and their
    Richardson extrapolation from the two finest levels.

    `build(grid)` returns the eigenvalues for that grid. With three or more
    levels the observed convergence ratio of successive differences is
    reported (about 4 for a second-order scheme).
    """
    if levels < 2:
        raise ParameterError("refinement needs at least two grid levels")
    sequence = []
    current = grid
    for level in range(levels):
        values = build(current)
        sequence.append(nearest(values, targets))
        logger.debug(f"Refinement level {level}: N={current.N}")
        if level < levels - 1:
            current = current.refined()

    result = {
        'levels': [np.asarray(s) for s in sequence],
        'extrapolated': richardson(sequence[-2], sequence[-1]),
        'ratios': None,
    }
    if levels >= 3:
        d1 = np.abs(sequence[-3] - sequence[-2])
        d2 = np.abs(sequence[-2] - sequence[-1])
        with np.errstate(divide='ignore', invalid='ignore'):
            result['ratios'] = np.where(d2 > 0, d1 / d2, np.inf)
    return result

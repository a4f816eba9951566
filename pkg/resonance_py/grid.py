"""
Uniform xi-grids on [-L, L] with trapezoid weights and refinement rules.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import MAX_GRID_POINTS, MIN_GRID_POINTS
from .errors import GridError


@dataclass(frozen=True)
class GridSpec:
    """Truncated uniform grid covering [-L, L] with N points."""
    L: float
    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < MIN_GRID_POINTS:
            raise GridError(f"grid needs N >= {MIN_GRID_POINTS} points, got {self.N}")
        if self.N > MAX_GRID_POINTS:
            raise GridError(f"grid N={self.N} exceeds the dense limit {MAX_GRID_POINTS}")
        if not self.L > 0:
            raise GridError(f"grid half-width must be positive, got L={self.L}")

    @property
    def dxi(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.N)

    @property
    def midpoints(self) -> np.ndarray:
        """Cell midpoints xi_{j-1/2}, j = 0..N, including the two ghost cells."""
        return -self.L + (np.arange(self.N + 1) - 0.5) * self.dxi

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.N, self.dxi)
        w[0] = w[-1] = 0.5 * self.dxi
        return w

    def refined(self) -> 'GridSpec':
        """Same interval, half the spacing (2N - 1 points, nodes nested)."""
        return GridSpec(L=self.L, N=2 * self.N - 1)

    def to_dict(self) -> dict:
        return {'L': float(self.L), 'N': int(self.N), 'dxi': self.dxi}


def require_band_fit(grid: GridSpec) -> None:
    """The sinc kernel band |xi - eta| <= 2 must fit inside the grid."""
    if grid.L < 2:
        raise GridError(f"grid half-width L={grid.L} < 2 cannot hold the kernel band")


def oracle_grid(epsilon: float, points: int = 999, width: float = 8.0) -> GridSpec:
    """
    Grid for the free complex harmonic oscillator at viscosity epsilon.

    The Fourier-side eigenfunctions have width epsilon**(1/4), so the
    half-width scales with it and the spacing stays a fixed fraction of it.
    """
    return GridSpec(L=width * epsilon ** 0.25, N=points)


def scaled_points(epsilon: float, base_points: int = 1201,
                  base_epsilon: float = 1e-2) -> int:
    """N proportional to epsilon**(-1/4) for a fixed half-width, odd, capped."""
    n = int(math.ceil(base_points * (base_epsilon / epsilon) ** 0.25))
    n += (n + 1) % 2
    return max(MIN_GRID_POINTS, min(n, MAX_GRID_POINTS - 1))

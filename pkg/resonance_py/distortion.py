"""
Periodic distortion in Fourier space.

Phi_theta(xi) = xi + theta*sin(pi*xi), the unitary U_theta for real theta and
the bounded remainder r_theta that the viscosity term leaves behind after
conjugation. All functions broadcast over numpy arrays.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, GridError, ParameterError
from .grid import GridSpec

PI = math.pi
THETA_REAL_BOUND = 1.0 / PI


@dataclass(frozen=True)
class DistortionParams:
    """Distortion angle plus its admissibility bounds."""
    theta: complex
    K: float = math.inf

    @property
    def delta0(self) -> float:
        return min(THETA_REAL_BOUND, self.K)

    @classmethod
    def for_band(cls, n: int, delta: float, K: float = math.inf) -> 'DistortionParams':
        """theta = (-1)^n * i * delta, the sign that pushes band n's curve down."""
        if n < 1:
            raise ParameterError(f"band index must be >= 1, got {n}")
        params = cls(theta=complex(0.0, (-1) ** n * delta), K=K)
        params.validate()
        return params

    def validate(self) -> None:
        theta = complex(self.theta)
        if abs(theta.real) >= THETA_REAL_BOUND:
            raise ParameterError(
                f"|Re theta| = {abs(theta.real):.6g} must stay below 1/pi"
            )
        if theta.imag != 0 and not abs(theta.imag) < self.delta0:
            raise ParameterError(
                f"|Im theta| = {abs(theta.imag):.6g} must stay below "
                f"delta0 = {self.delta0:.6g}"
            )

    def min_dphi_bound(self) -> float:
        """Lower bound for |Phi'_theta| on the real line."""
        theta = complex(self.theta)
        if theta.real == 0:
            return 1.0
        return 1.0 - PI * abs(theta.real)


def check_theta(theta: complex, K: float = math.inf) -> complex:
    theta = complex(theta)
    DistortionParams(theta=theta, K=K).validate()
    return theta


def phi(theta, xi):
    return xi + theta * np.sin(PI * xi)


def dphi(theta, xi):
    return 1.0 + PI * theta * np.cos(PI * xi)


def d2phi(theta, xi):
    return -PI ** 2 * theta * np.sin(PI * xi)


def d3phi(theta, xi):
    return -PI ** 3 * theta * np.cos(PI * xi)


def sqrt_dphi(theta, xi):
    """Principal branch of Phi'^(1/2); Phi' stays in the right half-plane."""
    p = np.asarray(dphi(theta, xi), dtype=complex)
    if np.any(p.real <= 0):
        raise ParameterError(f"Re Phi' <= 0 for theta={theta}; principal branch breaks")
    return np.sqrt(p)


def r_theta(theta, xi):
    """
    Remainder of the conjugated viscosity term.

    With p = Phi'_theta, the defining expression
    -p^(-1/2) d/dxi ( p^(-1) d/dxi p^(-1/2) ) reduces to
    p'' / (2 p^3) - 5 p'^2 / (4 p^4).
    """
    p = dphi(theta, xi)
    dp = d2phi(theta, xi)
    ddp = d3phi(theta, xi)
    return ddp / (2.0 * p ** 3) - 5.0 * dp ** 2 / (4.0 * p ** 4)


def apply_U(theta: float, samples, grid: GridSpec, order: int = 3) -> np.ndarray:
    """
    Apply U_theta f(xi) = Phi'(xi)^(1/2) f(Phi(xi)) to gridded samples.

    Only real theta is meaningful here (U is unitary); f between nodes comes
    from a cubic spline through the samples.
    """
    theta_c = complex(theta)
    if theta_c.imag != 0:
        raise ParameterError("apply_U needs a real distortion angle")
    theta = check_theta(theta_c).real
    samples = np.asarray(samples)
    if samples.shape != (grid.N,):
        raise GridError(f"expected {grid.N} samples, got shape {samples.shape}")
    if grid.N < order + 1:
        raise GridError(f"{grid.N} points cannot carry interpolation of order {order}")

    xi = grid.points
    mapped = phi(theta, xi)
    slack = 1e-12 * max(1.0, grid.L)
    outside = (mapped < xi[0] - slack) | (mapped > xi[-1] + slack)
    if np.any(outside):
        raise DomainError(
            f"Phi_theta maps {int(outside.sum())} grid points outside "
            f"[{xi[0]:.6g}, {xi[-1]:.6g}]"
        )
    mapped = np.clip(mapped, xi[0], xi[-1])

    if theta == 0:
        return samples.astype(complex)
    spline = CubicSpline(xi, samples)
    return np.sqrt(dphi(theta, xi)) * spline(mapped)


def discrete_norm(samples, grid: GridSpec) -> float:
    """Trapezoid L2 norm on the grid."""
    return float(np.sqrt(np.sum(grid.weights * np.abs(samples) ** 2)))

"""
Essential-spectrum curves, thresholds and the resonance regions.

For theta = (-1)^n i delta the curve {Phi_theta(xi)^2} is a graph
y = kappa(x) over x >= 0 that dips below the real axis on each band
((n-1)^2, n^2) and touches it at the thresholds n^2.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize
from scipy.interpolate import PchipInterpolator

from .distortion import DistortionParams, dphi, phi
from .errors import RegionError

logger = logging.getLogger(__name__)

KAPPA_XTOL = 1e-12
CURVE_SAMPLES = 4001


class RegionKind(Enum):
    OMEGA = 'omega'
    OMEGA_PRIME = 'omega_prime'


def band_theta(n: int, delta: float) -> complex:
    return complex(0.0, (-1) ** n * delta)


def thresholds(n_max: int) -> np.ndarray:
    return np.arange(n_max + 1, dtype=float) ** 2


def essential_curve(theta: complex, xi_range=(0.0, 4.0), samples: int = 2001) -> np.ndarray:
    xi = np.linspace(xi_range[0], xi_range[1], samples)
    return phi(theta, xi) ** 2


def curve_crossings(theta: complex, xi_range=(0.0, 4.0), samples: int = 2001) -> np.ndarray:
    """
    Real parts where the sampled curve meets the real axis (sign changes of
    Im, linearly interpolated); they approach the threshold set as sampling
    refines.
    """
    curve = essential_curve(theta, xi_range, samples)
    y = curve.imag
    touch = np.flatnonzero(y == 0)
    change = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    t = y[change] / (y[change] - y[change + 1])
    crossed = curve.real[change] + t * (curve.real[change + 1] - curve.real[change])
    return np.sort(np.concatenate([curve.real[touch], crossed]))


def _real_square(delta: float, xi):
    return xi ** 2 - delta ** 2 * np.sin(math.pi * xi) ** 2


def _real_square_slope(delta: float, xi):
    return 2.0 * xi - math.pi * delta ** 2 * np.sin(2.0 * math.pi * xi)


def kappa(n: int, delta: float, x: float) -> float:
    """
    Im Phi_theta(xi)^2 on band n, where xi in [n-1, n] solves
    Re Phi_theta(xi)^2 = x and theta = (-1)^n i delta.
    """
    DistortionParams.for_band(n, delta)
    lo, hi = (n - 1) ** 2, n ** 2
    if not lo <= x <= hi:
        raise RegionError(f"x={x} lies outside band {n} = [{lo}, {hi}]")
    xi = optimize.brentq(
        lambda s: _real_square(delta, s) - x, n - 1, n, xtol=KAPPA_XTOL, rtol=4 * np.finfo(float).eps
    )
    return float((phi(band_theta(n, delta), xi) ** 2).imag)


def prime_slope(delta: float) -> float:
    return 0.5 * (1.0 / (math.pi * delta) - math.pi * delta)


@dataclass
class Region:
    """Omega_{n,delta} (or its viscosity variant) with a tabulated curve."""
    n: int
    delta: float
    kind: RegionKind = RegionKind.OMEGA
    curve_tol: float = 1e-9
    threshold_tol: float = 1e-9
    curve_samples: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.params = DistortionParams.for_band(self.n, self.delta)
        xi = np.linspace(self.n - 1, self.n, CURVE_SAMPLES)
        values = phi(self.params.theta, xi) ** 2
        self.curve_samples = np.column_stack([values.real, values.imag])
        self._xi_of_x = PchipInterpolator(values.real, xi)

    @property
    def theta(self) -> complex:
        return self.params.theta

    @property
    def bounds(self):
        return (self.n - 1) ** 2, self.n ** 2

    def kappa_many(self, x) -> np.ndarray:
        """Bulk kappa: monotone interpolation of xi(x), then two Newton steps."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.bounds
        if np.any((x < lo) | (x > hi)):
            raise RegionError(f"kappa queried outside band {self.n}")
        xi = np.clip(self._xi_of_x(x), self.n - 1, self.n)
        for _ in range(2):
            slope = _real_square_slope(self.delta, xi)
            safe = np.abs(slope) > 1e-8
            step = np.where(safe, (_real_square(self.delta, xi) - x) / np.where(safe, slope, 1.0), 0.0)
            xi = np.clip(xi - step, self.n - 1, self.n)
        return (phi(self.theta, xi) ** 2).imag

    def contains(self, z: complex) -> bool:
        return in_region(z, self)

    def mask(self, zs) -> np.ndarray:
        """Vectorized membership with the tabulated curve."""
        zs = np.asarray(zs, dtype=complex)
        x, y = zs.real, zs.imag
        lo, hi = self.bounds
        near = (np.abs(x - lo) < self.threshold_tol) | (np.abs(x - hi) < self.threshold_tol)
        inside = (x > lo) & (x < hi) & ~near
        result = np.zeros(zs.shape, dtype=bool)
        if np.any(inside):
            k = self.kappa_many(x[inside])
            result[inside] = y[inside] > k + self.curve_tol
        if self.kind is RegionKind.OMEGA_PRIME:
            s = prime_slope(self.delta)
            # the symbol touches both lines where cos(pi xi) = +-1
            tol = self.curve_tol
            result &= (y > s * (lo - x) + tol) & (y > s * (x - hi) + tol)
        return result

    def boundary_table(self, samples: int = 401) -> np.ndarray:
        """Rows (x, kappa(x), lower slope line, upper slope line)."""
        lo, hi = self.bounds
        x = np.linspace(lo, hi, samples)
        s = prime_slope(self.delta)
        return np.column_stack([x, self.kappa_many(x), s * (lo - x), s * (x - hi)])

    def distance_to_boundary(self, z: complex) -> float:
        """Vertical clearance above the curve and horizontal clearance to the thresholds."""
        lo, hi = self.bounds
        x = float(np.real(z))
        if not lo < x < hi:
            return 0.0
        clearance = [float(np.imag(z)) - kappa(self.n, self.delta, x), x - lo, hi - x]
        if self.kind is RegionKind.OMEGA_PRIME:
            s = prime_slope(self.delta)
            y = float(np.imag(z))
            clearance += [(y - s * (lo - x)) / math.hypot(1.0, s), (y - s * (x - hi)) / math.hypot(1.0, s)]
        return max(0.0, min(clearance))


def in_region(z: complex, region: Region) -> bool:
    """Membership of z in Omega_{n,delta} or Omega'_{n,delta} (exact kappa)."""
    x, y = float(np.real(z)), float(np.imag(z))
    lo, hi = region.bounds
    if min(abs(x - lo), abs(x - hi)) < region.threshold_tol:
        logger.debug(f"near-threshold query z={z} for band {region.n}")
        return False
    if not lo < x < hi:
        return False
    if not y > kappa(region.n, region.delta, x) + region.curve_tol:
        return False
    if region.kind is RegionKind.OMEGA_PRIME:
        s = prime_slope(region.delta)
        tol = region.curve_tol
        return y > s * (lo - x) + tol and y > s * (x - hi) + tol
    return True


def symbol_numerical_range(theta: complex, xi_samples, x_samples) -> np.ndarray:
    """Samples of Phi(xi)^2 - i Phi'(xi)^-2 x^2 over the xi x x product."""
    xi = np.asarray(xi_samples, dtype=float)[:, None]
    x = np.asarray(x_samples, dtype=float)[None, :]
    return (phi(theta, xi) ** 2 - 1j * dphi(theta, xi) ** -2 * x ** 2).ravel()

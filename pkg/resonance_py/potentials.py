"""
Potential families with computable Fourier transforms.

Each family is V = sum_j s_j W_j with a pi-periodic factor and an envelope
that is analytic in a sector; the distorted kernel needs the transform
hat_V at complex arguments Phi(xi) - Phi(eta).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .distortion import phi, sqrt_dphi
from .errors import ConfigError, DomainError, ParameterError, QuadratureError
from .grid import GridSpec

logger = logging.getLogger(__name__)

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

QUADRATURE_TOL = 1e-10
QUADRATURE_START = 32
QUADRATURE_MAX = 4096


class PotentialFamily(Enum):
    SINC = 'sinc'
    GAUSSIAN = 'gaussian'
    COMPACT = 'compact'
    ZERO = 'zero'
    COMPOSITE = 'composite'


COMPACT_SHAPES = ('steps', 'smooth')


@dataclass(frozen=True)
class PotentialSpec:
    """
    Tagged potential family.

    params per family:
        sinc:      amplitude a                  V = a sin(2x)/x
        gaussian:  width sigma, coefficients    V = exp(-x^2/sigma) sum_k a_k e^{2ikx}
        compact:   radius b, shape, values      steps or smooth bump, support [-b, b]
    """
    family: PotentialFamily
    params: Dict = field(default_factory=dict)
    mu: float = 1.0
    K: float = math.inf
    components: Tuple['PotentialSpec', ...] = ()

    R0 = 0.0

    def to_dict(self) -> dict:
        data = {'family': self.family.value, 'mu': self.mu, 'K': self.K}
        params = dict(self.params)
        if 'coefficients' in params:
            params['coefficients'] = {
                str(k): [v.real, v.imag] for k, v in sorted(params['coefficients'].items())
            }
        data['params'] = params
        if self.components:
            data['components'] = [c.to_dict() for c in self.components]
        return data


def zero() -> PotentialSpec:
    return PotentialSpec(PotentialFamily.ZERO)


def sinc(amplitude: float) -> PotentialSpec:
    return PotentialSpec(PotentialFamily.SINC, {'amplitude': float(amplitude)})


def gaussian(width: float, coefficients: Dict[int, complex], mu: float = 1.0) -> PotentialSpec:
    if not width > 0:
        raise ParameterError(f"gaussian width must be positive, got {width}")
    coefficients = {int(k): complex(v) for k, v in coefficients.items()}
    for k, a_k in coefficients.items():
        partner = coefficients.get(-k, 0j)
        if abs(partner - a_k.conjugate()) > 1e-12 * max(1.0, abs(a_k)):
            raise ParameterError(
                f"coefficient a_{-k} must equal conj(a_{k}) for a real potential"
            )
    return PotentialSpec(
        PotentialFamily.GAUSSIAN,
        {'width': float(width), 'coefficients': coefficients},
        mu=mu,
    )


def compact(radius: float, values, shape: str = 'steps') -> PotentialSpec:
    if not radius > 0:
        raise ParameterError(f"support radius must be positive, got {radius}")
    if shape not in COMPACT_SHAPES:
        raise ParameterError(f"compact shape must be one of {COMPACT_SHAPES}, got {shape!r}")
    values = tuple(float(v) for v in np.atleast_1d(values))
    if not values:
        raise ParameterError("compact potential needs at least one value")
    return PotentialSpec(
        PotentialFamily.COMPACT,
        {'radius': float(radius), 'shape': shape, 'values': values},
        mu=math.inf,
    )


def composite(*components: PotentialSpec) -> PotentialSpec:
    if not components:
        return zero()
    return PotentialSpec(
        PotentialFamily.COMPOSITE,
        mu=min(c.mu for c in components),
        K=min(c.K for c in components),
        components=tuple(components),
    )


def parse_coefficients(value) -> Dict[int, complex]:
    """'0:1, 1:0.5-0.2j, -1:0.5+0.2j' (or the list of its items) -> {k: a_k}."""
    items = value if isinstance(value, (list, tuple)) else str(value).split(',')
    coefficients = {}
    for item in items:
        item = str(item).strip()
        if not item:
            continue
        try:
            k, a_k = item.split(':')
            coefficients[int(k)] = complex(a_k.replace(' ', ''))
        except ValueError:
            raise ConfigError(f"coefficient entries look like 'k:a_k', got {item!r}")
    return coefficients


def spec_from_config(potential: dict) -> PotentialSpec:
    """Build a PotentialSpec from the `potential.*` config group."""
    name = str(potential.get('family', 'zero')).lower()
    try:
        family = PotentialFamily(name)
    except ValueError:
        raise ConfigError(f"unknown potential family {name!r}")

    if family is PotentialFamily.COMPOSITE:
        names = potential.get('components', '')
        if isinstance(names, str):
            names = [n for n in names.split(',')]
        parts = [str(n).strip().lower() for n in names if str(n).strip()]
        if not parts or 'composite' in parts:
            raise ConfigError("composite potential needs a list of plain component families")
        return composite(*[spec_from_config({**potential, 'family': p}) for p in parts])

    builders = {
        PotentialFamily.ZERO: lambda: zero(),
        PotentialFamily.SINC: lambda: sinc(float(potential.get('amplitude', 1.0))),
        PotentialFamily.GAUSSIAN: lambda: gaussian(
            float(potential.get('width', 1.0)),
            parse_coefficients(potential.get('coefficients', '0:1')),
            mu=float(potential.get('mu', 1.0)),
        ),
        PotentialFamily.COMPACT: lambda: compact(
            float(potential.get('radius', 1.0)),
            potential.get('values', [1.0]),
            shape=str(potential.get('shape', 'steps')),
        ),
    }
    try:
        spec = builders[family]()
        K = float(potential.get('K', math.inf))
    except ParameterError as e:
        raise ConfigError(str(e))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed potential.* value: {e}")
    if K != spec.K:
        spec = PotentialSpec(spec.family, spec.params, spec.mu, K, spec.components)
    return spec


# --- x-space profiles -----------------------------------------------------

def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def _step_edges(spec: PotentialSpec) -> np.ndarray:
    values = spec.params['values']
    return spec.params['radius'] * np.arange(len(values) + 1) / len(values)


def evaluate(spec: PotentialSpec, x) -> np.ndarray:
    """V(x) on the real line."""
    x = np.asarray(x, dtype=float)
    family = spec.family
    if family is PotentialFamily.ZERO:
        return np.zeros_like(x)
    if family is PotentialFamily.SINC:
        return spec.params['amplitude'] * 2.0 * np.sinc(2.0 * x / math.pi)
    if family is PotentialFamily.GAUSSIAN:
        periodic = sum(
            a_k * np.exp(2j * k * x) for k, a_k in spec.params['coefficients'].items()
        )
        return np.real(np.exp(-x ** 2 / spec.params['width']) * periodic)
    if family is PotentialFamily.COMPACT:
        b = spec.params['radius']
        values = spec.params['values']
        if spec.params['shape'] == 'steps':
            edges = _step_edges(spec)
            idx = np.searchsorted(edges, np.abs(x), side='right') - 1
            out = np.zeros_like(x)
            inside = np.abs(x) < b
            out[inside] = np.asarray(values)[idx[inside]]
            return out
        t = x / b
        poly = sum(c * t ** (2 * j) for j, c in enumerate(values))
        return _bump(t) * poly
    return sum(evaluate(c, x) for c in spec.components)


# --- Fourier transforms ---------------------------------------------------

def _sinc_hat(spec, z):
    z = np.asarray(z)
    if np.iscomplexobj(z) and np.any(z.imag != 0):
        raise DomainError(
            "the sinc family is only evaluated through its exact kernel; "
            "hat_V needs a real argument"
        )
    z = np.real(z)
    a = spec.params['amplitude']
    out = np.where(np.abs(z) < 2.0, 1.0, 0.0)
    out = np.where(np.isclose(np.abs(z), 2.0, rtol=0.0, atol=1e-12), 0.5, out)
    return a * math.sqrt(math.pi / 2.0) * out.astype(complex)


def _gaussian_hat(spec, z):
    sigma = spec.params['width']
    z = np.asarray(z, dtype=complex)
    total = np.zeros_like(z)
    for k, a_k in spec.params['coefficients'].items():
        total = total + a_k * math.sqrt(sigma / 2.0) * np.exp(-sigma * (z - 2 * k) ** 2 / 4.0)
    return total


def _sin_over(r, z):
    """sin(r z) / z, entire in z."""
    return r * np.sinc(r * z / math.pi)


def _steps_hat(spec, z):
    z = np.asarray(z, dtype=complex)
    edges = _step_edges(spec)
    total = np.zeros_like(z)
    for j, c in enumerate(spec.params['values']):
        total = total + c * 2.0 * (_sin_over(edges[j + 1], z) - _sin_over(edges[j], z))
    return INV_SQRT_2PI * total


@lru_cache(maxsize=16)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _adaptive_quadrature(spec: PotentialSpec, integrate):
    """
    Doubling Gauss-Legendre on [-b, b] until two levels agree to QUADRATURE_TOL.

    `integrate(x, wv)` returns the transform array for nodes x and weights
    wv = w * V(x) (the e^{-ixz} factor is the caller's business).
    """
    b = spec.params['radius']
    previous = None
    n = QUADRATURE_START
    while n <= QUADRATURE_MAX:
        t, w = _gauss_legendre(n)
        x = b * t
        wv = b * w * evaluate(spec, x)
        current = INV_SQRT_2PI * integrate(x, wv)
        if previous is not None:
            change = np.max(np.abs(current - previous)) if current.size else 0.0
            scale = max(1.0, float(np.max(np.abs(current))) if current.size else 1.0)
            if change <= QUADRATURE_TOL * scale:
                logger.debug(f"Gauss-Legendre converged with {n} nodes (change {change:.2e})")
                return current
        previous = current
        n *= 2
    raise QuadratureError(
        f"compact transform did not converge to {QUADRATURE_TOL} with {QUADRATURE_MAX} nodes"
    )


def _smooth_hat(spec, z):
    z = np.asarray(z, dtype=complex)
    return _adaptive_quadrature(
        spec, lambda x, wv: np.exp(-1j * np.multiply.outer(z, x)) @ wv
    )


def _compact_hat(spec, z):
    if spec.params['shape'] == 'steps':
        return _steps_hat(spec, z)
    return _smooth_hat(spec, z)


def hat_V(spec: PotentialSpec, z) -> np.ndarray:
    """Unitary Fourier transform (2 pi)^(-1/2) int V(x) e^{-ixz} dx at complex z."""
    transforms = {
        PotentialFamily.ZERO: lambda s, w: np.zeros_like(np.asarray(w, dtype=complex)),
        PotentialFamily.SINC: _sinc_hat,
        PotentialFamily.GAUSSIAN: _gaussian_hat,
        PotentialFamily.COMPACT: _compact_hat,
        PotentialFamily.COMPOSITE: lambda s, w: sum(
            (hat_V(c, w) for c in s.components), np.zeros_like(np.asarray(w, dtype=complex))
        ),
    }
    return transforms[spec.family](spec, z)


# --- distorted kernel -----------------------------------------------------

def kernel(spec: PotentialSpec, theta: complex, xi, eta) -> np.ndarray:
    """
    Distorted kernel (2 pi)^(-1/2) Phi'(xi)^(1/2) hat_V(Phi(xi)-Phi(eta)) Phi'(eta)^(1/2).

    For the sinc family hat_V(Phi(xi)-Phi(eta)) is the undistorted indicator
    of |xi - eta| <= 2, since Phi is monotone with Phi(xi + 2) = Phi(xi) + 2.
    """
    xi, eta = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
    if spec.family is PotentialFamily.COMPOSITE:
        return sum(
            (kernel(c, theta, xi, eta) for c in spec.components),
            np.zeros(xi.shape, dtype=complex),
        )
    weight = sqrt_dphi(theta, xi) * sqrt_dphi(theta, eta)
    if spec.family is PotentialFamily.SINC:
        return INV_SQRT_2PI * weight * _sinc_hat(spec, xi - eta)
    return INV_SQRT_2PI * weight * hat_V(spec, phi(theta, xi) - phi(theta, eta))


def kernel_matrix(spec: PotentialSpec, theta: complex, grid: GridSpec) -> np.ndarray:
    """Kernel sampled on grid x grid (no quadrature weights)."""
    xi = grid.points
    if spec.family is PotentialFamily.COMPOSITE:
        return sum(
            (kernel_matrix(c, theta, grid) for c in spec.components),
            np.zeros((grid.N, grid.N), dtype=complex),
        )
    if spec.family is PotentialFamily.ZERO:
        return np.zeros((grid.N, grid.N), dtype=complex)
    if spec.family is PotentialFamily.COMPACT and spec.params['shape'] == 'smooth':
        # e^{-ix(Phi_i - Phi_j)} factors, so each node contributes a rank-one term
        s = sqrt_dphi(theta, xi)
        f = phi(theta, xi)
        hat = _adaptive_quadrature(
            spec, lambda x, wv: (np.exp(-1j * np.outer(f, x)) * wv) @ np.exp(1j * np.outer(x, f))
        )
        return INV_SQRT_2PI * np.outer(s, s) * hat
    return kernel(spec, theta, xi[:, None], xi[None, :])


@dataclass(frozen=True)
class KernelEvaluator:
    """The distorted kernel of one potential at a fixed distortion angle."""
    spec: PotentialSpec
    theta: complex

    def __call__(self, xi, eta) -> np.ndarray:
        return kernel(self.spec, self.theta, xi, eta)

    def matrix(self, grid: GridSpec) -> np.ndarray:
        return kernel_matrix(self.spec, self.theta, grid)


def schur_bound(block: np.ndarray, weights: np.ndarray) -> float:
    """Schur test: ||T|| <= sqrt(max row sum * max column sum) of |K| w."""
    mag = np.abs(block)
    rows = float(np.max(mag @ weights)) if mag.size else 0.0
    cols = float(np.max(weights @ mag)) if mag.size else 0.0
    return math.sqrt(rows * cols)


def kernel_bounds(spec: PotentialSpec, theta: complex, grid: GridSpec, R: float) -> dict:
    """
    Row-sum diagnostics of the distorted kernel on the grid.

    `tail` bounds the part with |xi - eta| > R, i.e. the piece that the
    near-diagonal truncation leaves out.
    """
    K = kernel_matrix(spec, theta, grid)
    w = grid.weights
    xi = grid.points
    far = np.abs(xi[:, None] - xi[None, :]) > R
    return {
        'row_sum_max': float(np.max(np.abs(K) @ w)),
        'full': schur_bound(K, w),
        'tail': schur_bound(np.where(far, K, 0.0), w),
        'R': float(R),
    }

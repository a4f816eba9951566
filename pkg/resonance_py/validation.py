"""
Acceptance suite: oracle and property checks behind `validate`.

Each check returns a CheckResult; run_validation collects them into a
machine-readable report. A failing check never stops the suite.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .assembly import assemble, refine_eigenvalues
from .config import RunConfig
from .distortion import phi
from .eigen import contour_projector, eig, projector_rank
from .errors import ResonanceError
from .flow import flow, free_cap_check, resonances
from .geometry import Region, RegionKind, band_theta, symbol_numerical_range
from .grid import GridSpec
from .jost import jost_resonance, layers_from_steps
from .potentials import compact, sinc, zero

logger = logging.getLogger(__name__)

WELL_RADIUS = 4.0
WELL_VALUES = (0.0, 0.0, 2.0)
FREE_EPSILONS = (1e-2, 1e-3)
REGION_DELTA = 0.05
SYMBOL_DELTAS = (0.05, 0.1)
PROJECTOR_SIZE = 16


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    error: Optional[str] = None
    duration_ms: int = 0

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'passed': self.passed,
            'value': self.value,
            'tolerance': self.tolerance,
            'detail': self.detail,
            'error': self.error,
            'duration_ms': self.duration_ms,
        }


def reference_well():
    return compact(WELL_RADIUS, WELL_VALUES, shape='steps')


def _grid(config: RunConfig) -> GridSpec:
    return GridSpec(L=config.L, N=config.N)


def check_free_cap(config: RunConfig) -> CheckResult:
    tol = float(config.validate_opts['free_tol'])
    runs = [free_cap_check(eps) for eps in FREE_EPSILONS]
    worst = max(r['max_relative_error'] for r in runs)
    return CheckResult('free_cap_oracle', worst <= tol, worst, tol, {
        'epsilons': list(FREE_EPSILONS),
        'max_relative_error': [r['max_relative_error'] for r in runs],
        'grids': [r['grid'] for r in runs],
    })


def check_hermitian_limit(config: RunConfig) -> CheckResult:
    tol = float(config.validate_opts['hermitian_tol'])
    A = assemble(sinc(1.0), 0.0, 0.0, _grid(config))
    values = eig(A).eigenvalues
    radius = float(np.max(np.abs(values)))
    ratio = float(np.max(np.abs(values.imag))) / radius
    return CheckResult('hermitian_limit', ratio <= tol, ratio, tol, {
        'spectral_radius': radius,
        'hermitian_defect': A.hermitian_defect(),
    })


def check_essential_curve(config: RunConfig) -> CheckResult:
    tol = 1e-12
    grid = _grid(config)
    worst = 0.0
    for sign in (1.0, -1.0):
        theta = 1j * sign * config.delta
        values = np.sort_complex(eig(assemble(zero(), theta, 0.0, grid)).eigenvalues)
        exact = np.sort_complex(phi(theta, grid.points) ** 2)
        worst = max(worst, float(np.max(np.abs(values - exact)) / np.max(np.abs(exact))))
    k = np.arange(1.0, 4.0)
    at_thresholds = float(np.max(np.abs(phi(1j * config.delta, k) ** 2 - k ** 2)))
    value = max(worst, at_thresholds)
    return CheckResult('essential_curve', value <= tol, value, tol, {
        'cloud_relative_gap': worst,
        'threshold_gap': at_thresholds,
    })


def check_region_identity(config: RunConfig) -> CheckResult:
    rng = np.random.default_rng(config.seed)
    count = int(config.validate_opts['region_points'])
    disagreements = {}
    for n in (1, 2, 3):
        omega = Region(n, REGION_DELTA, RegionKind.OMEGA)
        prime = Region(n, REGION_DELTA, RegionKind.OMEGA_PRIME)
        lo, hi = omega.bounds
        depth = float(np.min(omega.boundary_table()[:, 1]))
        x = rng.uniform(lo, hi, count)
        y = rng.uniform(1.2 * depth, -0.2 * depth, count)
        z = x + 1j * y
        disagreements[n] = int(np.sum(omega.mask(z) != prime.mask(z)))
    total = sum(disagreements.values())
    return CheckResult('region_identity', total == 0, float(total), 0.0, {
        'delta': REGION_DELTA,
        'points_per_band': count,
        'disagreements': disagreements,
    })


def check_symbol_disjoint(config: RunConfig) -> CheckResult:
    samples = int(config.validate_opts['symbol_points'])
    hits = {}
    for delta in SYMBOL_DELTAS:
        for n in (1, 2):
            prime = Region(n, delta, RegionKind.OMEGA_PRIME)
            xi = np.linspace(-(n + 1.0), n + 1.0, samples)
            x = np.linspace(0.0, 3.0 * n, samples)
            values = symbol_numerical_range(band_theta(n, delta), xi, x)
            hits[f"n={n},delta={delta}"] = int(np.sum(prime.mask(values)))
    total = sum(hits.values())
    return CheckResult('symbol_disjoint', total == 0, float(total), 0.0, {
        'samples': samples,
        'hits': hits,
    })


def _lowest_well_resonance(config: RunConfig) -> complex:
    records = resonances(reference_well(), 1, config.delta, _grid(config),
                         config.tolerances, config.contour, seed=config.seed,
                         max_workers=config.max_concurrent)
    if not records:
        raise ResonanceError("no resonance of the reference well found in Omega_1")
    return min(records, key=lambda r: r.z.real).z


def check_jost_agreement(config: RunConfig) -> CheckResult:
    tol = float(config.validate_opts['jost_tol'])
    well = reference_well()
    theta = band_theta(1, config.delta)
    z = _lowest_well_resonance(config)
    refined = refine_eigenvalues(
        lambda g: eig(assemble(well, theta, 0.0, g)).eigenvalues, _grid(config), [z]
    )
    computed = complex(refined['extrapolated'][0])
    oracle = jost_resonance(layers_from_steps(WELL_RADIUS, WELL_VALUES), computed)
    gap = abs(computed - oracle)
    return CheckResult('jost_agreement', gap <= tol, gap, tol, {
        'distortion': computed,
        'coarse': z,
        'jost': oracle,
    })


def check_viscosity_limit(config: RunConfig) -> CheckResult:
    """
    Flow checks for the reference well and the sinc potential. A potential
    without resonances in the band is reported as vacuous; the well must
    have at least one.
    """
    detail = {}
    failures = 0
    for name, spec in (('well', reference_well()), ('sinc', sinc(1.0))):
        result = flow(spec, 1, config.delta, config.epsilons, _grid(config),
                      tolerances=config.tolerances, contour=config.contour,
                      initial_gate=float(config.flow['initial_gate']),
                      rho_max=float(config.flow['rho_max']), seed=config.seed,
                      max_concurrent=config.max_concurrent)
        bad_counts = [c for c in result.counts if c['count'] != c['multiplicity']]
        failures += len(result.violations) + len(bad_counts)
        vacuous = not result.resonances
        if vacuous and name == 'well':
            failures += 1
        detail[name] = {
            'resonances': len(result.resonances),
            'matches': len(result.matches),
            'violations': len(result.violations),
            'count_mismatches': bad_counts,
            'vacuous': vacuous,
        }
    return CheckResult('viscosity_limit', failures == 0, float(failures), 0.0, detail)


def check_theta_robustness(config: RunConfig) -> CheckResult:
    tol = float(config.validate_opts['robust_tol'])
    well = reference_well()
    grid = _grid(config)
    records = resonances(well, 1, config.delta, grid, config.tolerances, config.contour,
                         seed=config.seed)
    if not records:
        return CheckResult('theta_robustness', False, math.inf, tol, {'resonances': 0})
    targets = [r.z for r in records]
    wider = min(1.2 * config.delta, 0.99 / math.pi)
    refined = [
        refine_eigenvalues(
            lambda g, d=d: eig(assemble(well, band_theta(1, d), 0.0, g)).eigenvalues,
            grid, targets,
        )['extrapolated']
        for d in (config.delta, wider)
    ]
    gaps = [float(g) for g in np.abs(refined[0] - refined[1])]
    worst = max(gaps)
    return CheckResult('theta_robustness', worst <= tol, worst, tol, {
        'deltas': [config.delta, wider],
        'gaps': gaps,
    })


def random_disc(rng: np.random.Generator, values: np.ndarray) -> Tuple[complex, float]:
    """Disc around a random eigenvalue whose circle sits in a spectral gap."""
    center = values[rng.integers(values.size)]
    d = np.sort(np.abs(values - center))
    gaps = [k for k in range(1, d.size - 1) if d[k + 1] >= 2.0 * d[k] > 0]
    if gaps:
        k = gaps[rng.integers(len(gaps))]
        return complex(center), float(math.sqrt(d[k] * d[k + 1]))
    return complex(center), float(0.5 * d[1])


def check_projector_rank(config: RunConfig) -> CheckResult:
    rng = np.random.default_rng(config.seed)
    trials = int(config.validate_opts['projector_trials'])
    points = max(128, config.contour['points'])
    mismatches = 0
    worst_idempotency = 0.0
    for _ in range(trials):
        A = rng.standard_normal((PROJECTOR_SIZE, PROJECTOR_SIZE)) \
            + 1j * rng.standard_normal((PROJECTOR_SIZE, PROJECTOR_SIZE))
        values = eig(A).eigenvalues
        center, radius = random_disc(rng, values)
        result = projector_rank(A, center, radius, M=points, eigenvalues=values)
        mismatches += int(result.rank != result.enclosed)
        P = contour_projector(A, center, radius, points)
        scale = max(1.0, float(np.linalg.norm(P, 2)))
        worst_idempotency = max(worst_idempotency, float(np.linalg.norm(P @ P - P, 2)) / scale)
    passed = mismatches == 0 and worst_idempotency <= 1e-6
    return CheckResult('projector_rank', passed, float(mismatches), 0.0, {
        'trials': trials,
        'idempotency_defect': worst_idempotency,
    })


CHECKS: List[Tuple[str, Callable[[RunConfig], CheckResult]]] = [
    ('free_cap_oracle', check_free_cap),
    ('hermitian_limit', check_hermitian_limit),
    ('essential_curve', check_essential_curve),
    ('region_identity', check_region_identity),
    ('symbol_disjoint', check_symbol_disjoint),
    ('jost_agreement', check_jost_agreement),
    ('viscosity_limit', check_viscosity_limit),
    ('theta_robustness', check_theta_robustness),
    ('projector_rank', check_projector_rank),
]


def run_validation(config: RunConfig,
                   extra: Sequence[Tuple[str, Callable[[RunConfig], CheckResult]]] = (),
                   only: Optional[Sequence[str]] = None) -> dict:
    results = []
    for name, check in list(CHECKS) + list(extra):
        if only and name not in only:
            continue
        logger.info(f"Running check {name}")
        start = time.time()
        try:
            result = check(config)
        except ResonanceError as e:
            logger.exception(f"Check {name} failed: {e}")
            result = CheckResult(name, False, math.inf, 0.0, error=str(e))
        result.duration_ms = int((time.time() - start) * 1000)
        status = 'passed' if result.passed else 'FAILED'
        logger.info(f"Check {name} {status}: value={result.value:.3e} ({result.duration_ms}ms)")
        results.append(result)
    return {
        'checks': [r.to_dict() for r in results],
        'passed': all(r.passed for r in results),
    }

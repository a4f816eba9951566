"""
Default configuration for resonance and viscosity-flow runs.
Values are grouped like the keys of the flat config file (`grid.L`, ...).
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from .errors import ConfigError

SCHEMA_VERSION = 1

MIN_GRID_POINTS = 16
MAX_GRID_POINTS = 4096

DEFAULT_POTENTIAL = {
    'family': 'sinc',
    'amplitude': 1.0,
    'width': 1.0,
    'coefficients': '0:1',
    'radius': 4.0,
    'shape': 'steps',
    'values': [0.0, 0.0, 2.0],
    'components': '',
    'mu': 1.0,
    'K': math.inf,
}

DEFAULT_GRID = {
    'L': 12.0,
    'N': 1201,
    'tail_radius': 4.0,
}

DEFAULT_FLOW = {
    'eps_max': 1e-1,
    'eps_min': 1e-5,
    'steps_per_decade': 2,
    'schedule': '',
    'discs': '',
    'initial_gate': 0.05,
    'rho_max': 0.05,
    'scale_grid': False,
}

DEFAULT_TOLERANCES = {
    'cluster': 1e-6,
    'stability': 1e-3,
    'curve_margin': 5e-3,
    'curve': 1e-9,
    'threshold': 1e-9,
    'rank': 1e-6,
    'contour_guard': 1e-6,
    'residual': 1e-8,
}

DEFAULT_CONTOUR = {
    'points': 64,
    'sketch': 24,
}

DEFAULT_VALIDATE = {
    'free_tol': 1e-6,
    'hermitian_tol': 1e-10,
    'jost_tol': 1e-4,
    'robust_tol': 1e-4,
    'region_points': 10000,
    'symbol_points': 200,
    'projector_trials': 50,
}

DEFAULT_OUTPUT = {
    'dir': 'out',
    'formats': 'csv,json,svg',
}

DEFAULT_CONFIG = {
    'potential': DEFAULT_POTENTIAL,
    'band': 1,
    'delta': 0.2,
    'grid': DEFAULT_GRID,
    'flow': DEFAULT_FLOW,
    'tol': DEFAULT_TOLERANCES,
    'contour': DEFAULT_CONTOUR,
    'validate': DEFAULT_VALIDATE,
    'output': DEFAULT_OUTPUT,
    'max_concurrent': 2,
    'seed': 1234,
}

OUTPUT_FORMATS = ('csv', 'json', 'svg')


def flatten(config: dict, prefix: str = '') -> Dict[str, Any]:
    """Nested default dicts -> flat dotted keys."""
    flat = {}
    for key, value in config.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


DEFAULT_FLAT = flatten(DEFAULT_CONFIG)


def geometric_schedule(eps_max: float, eps_min: float, steps_per_decade: int) -> List[float]:
    """Decreasing schedule eps_max -> eps_min with ratio 10**(-1/steps_per_decade)."""
    if not 0 < eps_min < eps_max:
        raise ConfigError(f"need 0 < eps_min < eps_max, got {eps_min}, {eps_max}")
    if steps_per_decade < 1:
        raise ConfigError("flow.steps_per_decade must be >= 1")
    count = int(round(math.log10(eps_max / eps_min) * steps_per_decade))
    return [eps_max * 10.0 ** (-k / steps_per_decade) for k in range(count + 1)]


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    if value in ('', None):
        return []
    return [value]


def _parse_discs(value) -> List[Tuple[complex, float]]:
    discs = []
    for item in _as_list(value):
        try:
            center, radius = str(item).split('@')
            discs.append((complex(center.replace(' ', '')), float(radius)))
        except ValueError:
            raise ConfigError(f"flow.discs entries look like '0.3-0.01j@0.02', got {item!r}")
    return discs


@dataclass
class RunConfig:
    """Validated run configuration; `resolved` is what output files embed."""
    potential: Dict[str, Any]
    band: int
    delta: float
    L: float
    N: int
    epsilons: List[float]
    discs: List[Tuple[complex, float]]
    flow: Dict[str, Any]
    tolerances: Dict[str, float]
    contour: Dict[str, int]
    validate_opts: Dict[str, Any]
    out_dir: str
    formats: List[str]
    max_concurrent: int
    seed: int
    resolved: Dict[str, Any] = field(default_factory=dict)
    tail_radius: float = 4.0

    @classmethod
    def from_mapping(cls, overrides: Dict[str, Any]) -> 'RunConfig':
        unknown = sorted(set(overrides) - set(DEFAULT_FLAT))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = {**DEFAULT_FLAT, **overrides}

        def group(prefix: str) -> Dict[str, Any]:
            return {
                key[len(prefix) + 1:]: value for key, value in merged.items()
                if key.startswith(prefix + '.')
            }

        flow = group('flow')
        formats = [str(f).strip().lower() for f in _as_list(merged['output.formats'])]
        if len(formats) == 1 and ',' in formats[0]:
            formats = [f.strip() for f in formats[0].split(',')]

        try:
            schedule = _as_list(flow['schedule'])
            if schedule:
                epsilons = [float(e) for e in schedule]
            else:
                epsilons = geometric_schedule(
                    float(flow['eps_max']), float(flow['eps_min']),
                    int(flow['steps_per_decade']),
                )
            config = cls(
                potential=group('potential'),
                band=int(merged['band']),
                delta=float(merged['delta']),
                L=float(merged['grid.L']),
                N=int(merged['grid.N']),
                epsilons=epsilons,
                discs=_parse_discs(flow['discs']),
                flow={
                    **flow,
                    'initial_gate': float(flow['initial_gate']),
                    'rho_max': float(flow['rho_max']),
                },
                tolerances={k: float(v) for k, v in group('tol').items()},
                contour={k: int(v) for k, v in group('contour').items()},
                validate_opts={
                    k: type(DEFAULT_VALIDATE[k])(v) for k, v in group('validate').items()
                },
                out_dir=str(merged['output.dir']),
                formats=[f for f in formats if f],
                max_concurrent=int(merged['max_concurrent']),
                seed=int(merged['seed']),
                resolved={key: merged[key] for key in sorted(merged)},
                tail_radius=float(merged['grid.tail_radius']),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"malformed config value: {e}")
        config.validate()
        return config

    def validate(self) -> None:
        if not self.formats:
            raise ConfigError("output.formats must name at least one format")
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats: {', '.join(bad)}")
        if not MIN_GRID_POINTS <= self.N <= MAX_GRID_POINTS:
            raise ConfigError(
                f"grid.N={self.N} outside [{MIN_GRID_POINTS}, {MAX_GRID_POINTS}]"
            )
        if not self.tail_radius > 0:
            raise ConfigError(f"grid.tail_radius={self.tail_radius} must be positive")
        if self.L < 2:
            raise ConfigError(f"grid.L={self.L} must be >= 2")
        if self.band < 1:
            raise ConfigError(f"band={self.band} must be >= 1")
        try:
            K = float(self.potential.get('K', math.inf))
        except (TypeError, ValueError):
            raise ConfigError(f"potential.K={self.potential.get('K')!r} is not a number")
        delta0 = min(1.0 / math.pi, K)
        if not 0 < self.delta < delta0:
            raise ConfigError(f"delta={self.delta} outside (0, {delta0:.6g})")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ConfigError(f"tol.{name}={value} must be positive")
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilon schedule must be a nonempty list of positive values")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ConfigError("epsilon schedule must be strictly decreasing")
        if self.contour['points'] < 8:
            raise ConfigError("contour.points must be >= 8")
        if self.max_concurrent < 1:
            raise ConfigError("max_concurrent must be >= 1")
        for _, radius in self.discs:
            if not radius > 0:
                raise ConfigError("flow.discs radii must be positive")

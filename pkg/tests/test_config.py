import math

import pytest

from resonance_py.config import DEFAULT_FLAT, RunConfig, geometric_schedule
from resonance_py.errors import ConfigError


def test_defaults_resolve_and_validate() -> None:
    config = RunConfig.from_mapping({})

    assert config.band == 1
    assert config.delta == 0.2
    assert (config.L, config.N) == (12.0, 1201)
    assert config.formats == ['csv', 'json', 'svg']
    assert len(config.epsilons) == 9
    assert config.epsilons[0] == pytest.approx(1e-1)
    assert config.epsilons[-1] == pytest.approx(1e-5)
    assert sorted(config.resolved) == sorted(DEFAULT_FLAT)


def test_geometric_schedule_ratio() -> None:
    schedule = geometric_schedule(1e-1, 1e-3, 2)

    ratios = [b / a for a, b in zip(schedule, schedule[1:])]
    assert len(schedule) == 5
    assert ratios == pytest.approx([1 / math.sqrt(10)] * 4)


@pytest.mark.parametrize('overrides', [
    {'grid.N': 0},
    {'grid.N': 10000},
    {'grid.L': 1.0},
    {'delta': 0.4},
    {'delta': 0.0},
    {'band': 0},
    {'tol.cluster': -1e-6},
    {'output.formats': 'csv,pdf'},
    {'output.formats': ''},
    {'flow.schedule': [1e-3, 1e-2]},
    {'flow.schedule': [1e-2, -1e-3]},
    {'contour.points': 4},
    {'max_concurrent': 0},
    {'flow.discs': '0.3-0.01j@0'},
    {'grid.tail_radius': 0.0},
    {'potential.K': 'abc'},
])
def test_invalid_configs_are_rejected(overrides) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(overrides)


def test_unknown_key_is_rejected() -> None:
    with pytest.raises(ConfigError, match='unknown config keys'):
        RunConfig.from_mapping({'grid.M': 3})


def test_delta_bound_follows_K() -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({'potential.K': 0.1, 'delta': 0.2})

    assert RunConfig.from_mapping({'potential.K': 0.3, 'delta': 0.2}).delta == 0.2


def test_explicit_schedule_and_discs() -> None:
    config = RunConfig.from_mapping({
        'flow.schedule': [1e-2, 1e-3],
        'flow.discs': ['0.3-0.01j@0.02', '0.5@0.1'],
        'output.formats': ['csv'],
    })

    assert config.epsilons == [1e-2, 1e-3]
    assert config.discs == [(0.3 - 0.01j, 0.02), (0.5 + 0j, 0.1)]
    assert config.formats == ['csv']

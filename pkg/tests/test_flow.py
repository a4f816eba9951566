import math

import numpy as np
import pytest

from resonance_py.assembly import assemble, nearest, refine_eigenvalues
from resonance_py.eigen import eig
from resonance_py.errors import GatingError, ParameterError
from resonance_py.flow import (
    _clusters, _link, auto_radius, cap_spectrum, compare_cap_spectra, flow,
    free_cap_check, free_cap_oracle, resonances, validate_schedule,
)
from resonance_py.geometry import Region, RegionKind, band_theta
from resonance_py.grid import GridSpec, oracle_grid
from resonance_py.jost import jost_resonance, layers_from_steps
from resonance_py.potentials import zero

SCHEDULE = [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5]


def _prime() -> Region:
    return Region(1, 0.2, RegionKind.OMEGA_PRIME)


def test_free_oracle_values() -> None:
    values = free_cap_oracle(1e-2, 3)

    assert values[0] == pytest.approx(0.1 * np.exp(-0.25j * math.pi))
    assert values[2] == pytest.approx(5 * values[0])


def test_free_cap_check_on_a_coarse_oracle_grid() -> None:
    report = free_cap_check(1e-2, count=3, grid=oracle_grid(1e-2, points=201))

    assert report['max_relative_error'] < 1e-5


@pytest.mark.slow
@pytest.mark.parametrize('epsilon', [1e-2, 1e-3])
def test_free_cap_check_meets_oracle_tolerance(epsilon) -> None:
    assert free_cap_check(epsilon)['max_relative_error'] <= 1e-6


def test_cap_spectrum_needs_positive_viscosity(small_grid) -> None:
    with pytest.raises(ParameterError):
        cap_spectrum(zero(), 0.0, 0.0, small_grid)


@pytest.mark.parametrize('schedule', [[], [1e-2, 1e-1], [1e-2, 0.0], [1e-2, 1e-2]])
def test_bad_schedules(schedule) -> None:
    with pytest.raises(ParameterError):
        validate_schedule(schedule)


def test_clusters_group_close_values() -> None:
    groups = _clusters(np.array([0.0, 1e-7, 1.0, 1.0 + 5e-7j]), 1e-6)

    assert sorted(len(g) for g in groups) == [2, 2]


def test_auto_radius_respects_neighbours_and_region() -> None:
    region = Region(1, 0.2)
    z = 0.5 - 0.01j
    others = np.array([z, z + 0.04, 2.0])

    assert auto_radius(z, others, region, 0.05) == pytest.approx(0.02)
    assert auto_radius(z, np.array([z]), region, 0.05) == 0.05


def test_zero_potential_has_no_resonances(small_grid) -> None:
    assert resonances(zero(), 1, 0.2, small_grid) == []


def test_link_follows_a_converging_eigenvalue() -> None:
    z, still = 0.5 - 0.01j, 0.2 - 0.05j
    spectra = [np.array([z + 0.1 * math.sqrt(e / 0.1), still]) for e in SCHEDULE]

    tracks, forks, failures = _link(SCHEDULE, spectra, _prime(), 1e-6, 0.05, True)

    assert [len(t.points) for t in tracks] == [4, 4]
    assert forks == [] and failures == []
    moving = [t for t in tracks if t.last != still][0]
    distances = [abs(v - z) for _, v in moving.points]
    assert distances == sorted(distances, reverse=True)


def test_link_reports_forks() -> None:
    spectra = [np.array([0.5 - 0.01j]), np.array([0.51 - 0.01j, 0.49 - 0.01j])]

    tracks, forks, _ = _link(SCHEDULE[:2], spectra, _prime(), 1e-6, 0.05, True)

    assert len(forks) == 1 and forks[0]['candidates'] == 2
    assert len(tracks) == 2


def test_link_gating_failure() -> None:
    path = [0.5, 0.49, 0.48, 0.6]
    spectra = [np.array([x - 0.01j]) for x in path]

    with pytest.raises(GatingError):
        _link(SCHEDULE, spectra, _prime(), 1e-6, 0.05, True)

    tracks, _, failures = _link(SCHEDULE, spectra, _prime(), 1e-6, 0.05, False)
    assert len(failures) == 1 and failures[0]['trajectory'] == 0
    assert len(tracks) == 2


def test_flow_without_potential_is_empty(small_grid) -> None:
    result = flow(zero(), 1, 0.2, [1e-1, 1e-2], small_grid, max_concurrent=2)

    assert result.matches == [] and result.resonances == []
    assert result.counts_consistent
    assert [p['flagged'] for p in result.pollution] == [False, False]


def test_flow_rejects_bad_schedule(small_grid) -> None:
    with pytest.raises(ParameterError):
        flow(zero(), 1, 0.2, [1e-2, 1e-1], small_grid)


def test_free_cap_spectrum_leaves_prime_region_empty(small_grid) -> None:
    report = compare_cap_spectra(zero(), 1e-1, 1, 0.2, small_grid)

    assert report['pairs'] == [] and report['unmatched'] == []
    assert report['agree']


@pytest.mark.slow
def test_distorted_and_plain_cap_spectra_agree_for_well(well) -> None:
    grid = GridSpec(L=12.0, N=601)
    report = compare_cap_spectra(well, 1e-2, 1, 0.2, grid)
    coarse = compare_cap_spectra(well, 1e-2, 1, 0.2, grid, refine=False)

    assert report['pairs']
    assert all(partner is not None for _, partner, _ in report['pairs'])
    assert report['agree'], report['max_gap']
    assert report['max_gap'] < coarse['max_gap']


@pytest.mark.slow
def test_well_resonance_matches_jost_and_flow(well) -> None:
    grid = GridSpec(L=12.0, N=1201)
    records = resonances(well, 1, 0.2, grid)
    lowest = min(records, key=lambda r: r.z.real)

    oracle = jost_resonance(layers_from_steps(4.0, (0.0, 0.0, 2.0)), lowest.z)
    assert abs(lowest.z - oracle) < 1e-3
    assert lowest.multiplicity == 1

    result = flow(well, 1, 0.2, [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3], grid,
                  records=records, strict_gating=False)
    assert result.counts_consistent
    assert any(m.resonance == records.index(lowest) for m in result.matches)


def test_free_cap_spectrum_scales_with_square_root_of_epsilon() -> None:
    epsilon = 1e-2
    low = cap_spectrum(zero(), epsilon, 0j, oracle_grid(epsilon, points=201)).eigenvalues
    high = cap_spectrum(zero(), 4 * epsilon, 0j, oracle_grid(4 * epsilon, points=201)).eigenvalues

    targets = free_cap_oracle(epsilon, 8)
    near_low = nearest(low, targets)
    near_high = nearest(high, 2 * targets)

    assert np.allclose(near_high, 2 * near_low, rtol=1e-9, atol=0)


@pytest.mark.slow
def test_well_resonances_do_not_move_with_delta(well) -> None:
    grid = GridSpec(L=12.0, N=601)
    records = resonances(well, 1, 0.2, grid)
    targets = [r.z for r in records]

    refined = [
        refine_eigenvalues(
            lambda g, d=d: eig(assemble(well, band_theta(1, d), 0.0, g)).eigenvalues,
            grid, targets,
        )['extrapolated']
        for d in (0.2, 0.24)
    ]

    assert targets
    assert np.max(np.abs(refined[0] - refined[1])) < 1e-4

import numpy as np
import pytest

from resonance_py.config import MAX_GRID_POINTS
from resonance_py.errors import GridError
from resonance_py.grid import GridSpec, oracle_grid, require_band_fit, scaled_points


def test_spacing_weights_and_midpoints() -> None:
    grid = GridSpec(L=12.0, N=1201)

    assert grid.dxi == pytest.approx(0.02)
    assert grid.points[0] == -12.0 and grid.points[-1] == 12.0
    assert grid.weights.sum() == pytest.approx(24.0)
    assert grid.midpoints.size == grid.N + 1
    assert grid.midpoints[0] == pytest.approx(-12.0 - 0.01)
    assert grid.midpoints[-1] == pytest.approx(12.0 + 0.01)


def test_refined_grid_is_nested() -> None:
    grid = GridSpec(L=3.0, N=61)
    fine = grid.refined()

    assert fine.N == 121
    assert np.allclose(fine.points[::2], grid.points, atol=1e-14)


@pytest.mark.parametrize('L, N', [(1.0, 8), (1.0, MAX_GRID_POINTS + 1), (0.0, 101)])
def test_invalid_grids(L, N) -> None:
    with pytest.raises(GridError):
        GridSpec(L=L, N=N)


def test_band_must_fit() -> None:
    with pytest.raises(GridError):
        require_band_fit(GridSpec(L=1.5, N=101))


def test_oracle_grid_scales_with_quarter_power() -> None:
    assert oracle_grid(1e-2).L == pytest.approx(8.0 * 1e-2 ** 0.25)
    assert oracle_grid(1e-2).N == 999
    assert oracle_grid(1e-3).L < oracle_grid(1e-2).L


def test_scaled_points_odd_and_capped() -> None:
    assert scaled_points(1e-2) == 1201
    assert scaled_points(1e-3) % 2 == 1
    assert scaled_points(1e-3) > 1201
    assert scaled_points(1e-9) < MAX_GRID_POINTS

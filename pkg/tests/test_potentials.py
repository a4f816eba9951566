import math

import numpy as np
import pytest
from scipy.integrate import quad

from resonance_py.errors import ConfigError, DomainError, ParameterError
from resonance_py.grid import GridSpec
from resonance_py.potentials import (
    KernelEvaluator, PotentialFamily, compact, composite, evaluate, gaussian, hat_V, kernel,
    kernel_bounds, kernel_matrix, parse_coefficients, sinc, spec_from_config, zero,
)


def _numeric_hat(spec, z, limit) -> float:
    """Transform of an even real potential by adaptive quadrature."""
    value, _ = quad(lambda x: evaluate(spec, x) * math.cos(z * x), -limit, limit,
                    limit=400, epsabs=1e-13, epsrel=1e-13)
    return value / math.sqrt(2 * math.pi)


def test_sinc_kernel_is_half_amplitude_band() -> None:
    spec = sinc(1.0)

    assert complex(kernel(spec, 0.0, 0.0, 1.0)) == pytest.approx(0.5)
    assert complex(kernel(spec, 0.0, 0.0, 3.0)) == 0
    assert complex(kernel(spec, 0.0, 0.0, 2.0)) == pytest.approx(0.25)


def test_sinc_kernel_under_distortion() -> None:
    value = complex(kernel(sinc(1.0), 0.2j, 0.0, 1.0))

    assert value == pytest.approx(0.5 * abs(1 + 0.2j * math.pi))


def test_sinc_transform_needs_real_arguments() -> None:
    with pytest.raises(DomainError):
        hat_V(sinc(1.0), np.array([0.5 + 0.1j]))


def test_gaussian_transform_matches_quadrature() -> None:
    spec = gaussian(2.0, {0: 1.0})

    assert float(hat_V(spec, 0.7).real) == pytest.approx(_numeric_hat(spec, 0.7, 40.0), abs=1e-11)


def test_gaussian_needs_conjugate_coefficients() -> None:
    with pytest.raises(ParameterError):
        gaussian(1.0, {1: 0.5j})
    assert gaussian(1.0, {1: 0.5j, -1: -0.5j}).family is PotentialFamily.GAUSSIAN


def test_steps_transform_at_zero_is_the_integral() -> None:
    spec = compact(4.0, (0.0, 0.0, 2.0))

    assert complex(hat_V(spec, 0.0)) == pytest.approx(2.0 * 2.0 * 4.0 / 3.0 / math.sqrt(2 * math.pi))


def test_steps_transform_matches_quadrature() -> None:
    spec = compact(4.0, (0.0, 0.0, 2.0))
    z = 1.3
    edges = [8.0 / 3.0, 4.0]
    value, _ = quad(lambda x: 2.0 * math.cos(z * x), *edges, epsabs=1e-13)

    assert float(hat_V(spec, z).real) == pytest.approx(2.0 * value / math.sqrt(2 * math.pi), abs=1e-12)


def test_smooth_transform_matches_quadrature() -> None:
    spec = compact(1.5, (1.0, 0.5), shape='smooth')

    assert float(hat_V(spec, 1.3).real) == pytest.approx(_numeric_hat(spec, 1.3, 1.5), abs=1e-9)


def test_smooth_kernel_matrix_matches_pointwise_kernel() -> None:
    spec = compact(1.5, (1.0, 0.5), shape='smooth')
    grid = GridSpec(L=3.0, N=31)
    xi = grid.points

    direct = kernel(spec, 0.1j, xi[:, None], xi[None, :])

    assert np.allclose(kernel_matrix(spec, 0.1j, grid), direct, atol=1e-8)


def test_kernel_is_analytic_in_theta() -> None:
    spec = gaussian(1.0, {0: 1.0})
    theta, h = 0.2j, 1e-4

    def k(t):
        return complex(kernel(spec, t, 0.3, 1.1))

    d_bar = 0.5 * ((k(theta + h) - k(theta - h)) / (2 * h)
                   + 1j * (k(theta + 1j * h) - k(theta - 1j * h)) / (2 * h))

    assert abs(d_bar) < 1e-6


def test_composite_kernel_is_the_sum() -> None:
    grid = GridSpec(L=3.0, N=31)
    parts = (sinc(1.0), gaussian(1.0, {0: 0.5}))

    total = kernel_matrix(composite(*parts), 0.1j, grid)

    assert np.allclose(total, sum(kernel_matrix(p, 0.1j, grid) for p in parts))
    assert composite() == zero()


def test_kernel_bounds_tail_vanishes_outside_sinc_band() -> None:
    bounds = kernel_bounds(sinc(1.0), 0.0, GridSpec(L=4.0, N=81), R=2.5)

    assert bounds['tail'] == 0.0
    assert bounds['full'] >= bounds['row_sum_max'] * 0.5 > 0


def test_parse_coefficients() -> None:
    assert parse_coefficients('0:1, 1:0.5-0.2j, -1:0.5+0.2j') == {
        0: 1, 1: 0.5 - 0.2j, -1: 0.5 + 0.2j,
    }
    with pytest.raises(ConfigError):
        parse_coefficients('1=0.5')


def test_spec_from_config() -> None:
    spec = spec_from_config({'family': 'compact', 'radius': 4, 'values': [0, 0, 2],
                             'shape': 'steps'})
    mixed = spec_from_config({'family': 'composite', 'components': 'sinc,compact',
                              'amplitude': 0.5, 'radius': 2.0, 'values': [1.0]})

    assert spec.params['values'] == (0.0, 0.0, 2.0)
    assert [c.family for c in mixed.components] == [PotentialFamily.SINC, PotentialFamily.COMPACT]
    with pytest.raises(ConfigError):
        spec_from_config({'family': 'coulomb'})


@pytest.mark.parametrize('spec', [
    gaussian(1.0, {0: 1.0, 1: 0.25, -1: 0.25}),
    compact(4.0, (0.0, 0.0, 2.0)),
    composite(sinc(1.0), compact(2.0, (1.0,))),
], ids=['gaussian', 'well', 'composite'])
def test_undistorted_kernel_is_hermitian(spec) -> None:
    grid = GridSpec(L=4.0, N=81)
    evaluator = KernelEvaluator(spec, 0.0)
    block = evaluator.matrix(grid)

    assert np.allclose(block, block.conj().T, atol=1e-12)
    assert complex(evaluator(0.3, 1.1)) == pytest.approx(complex(kernel(spec, 0.0, 0.3, 1.1)))


def test_smooth_transform_at_complex_argument() -> None:
    spec = compact(1.5, (1.0, 0.5), shape='smooth')
    z = 1.0 + 0.1j

    def part(f):
        value, _ = quad(lambda x: float(evaluate(spec, x)) * f(x), -1.5, 1.5,
                        limit=400, epsabs=1e-14, epsrel=1e-13)
        return value

    # V is even, so its transform is the integral of V(x) cos(zx)
    re = part(lambda x: math.cos(z.real * x) * math.cosh(z.imag * x))
    im = -part(lambda x: math.sin(z.real * x) * math.sinh(z.imag * x))
    oracle = complex(re, im) / math.sqrt(2 * math.pi)

    assert abs(complex(hat_V(spec, z)) - oracle) < 1e-8

import math

import numpy as np
import pytest

from resonance_py.distortion import (
    DistortionParams, apply_U, check_theta, d2phi, discrete_norm, dphi, phi, r_theta,
    sqrt_dphi,
)
from resonance_py.errors import DomainError, GridError, ParameterError
from resonance_py.grid import GridSpec


def test_identity_at_theta_zero() -> None:
    xi = np.linspace(-3, 3, 101)

    assert np.array_equal(phi(0.0, xi), xi)
    assert np.array_equal(dphi(0.0, xi), np.ones_like(xi))
    assert np.all(r_theta(0.0, xi) == 0)


def test_phi_keeps_integers_and_periodicity() -> None:
    theta = 0.2j
    k = np.arange(-4.0, 5.0)
    xi = np.linspace(-1, 1, 11)

    assert np.max(np.abs(phi(theta, k) - k)) < 1e-14
    assert np.allclose(phi(theta, xi + 2.0), phi(theta, xi) + 2.0, atol=1e-14)


@pytest.mark.parametrize('theta', [0.1, 0.15j, 0.05 - 0.1j])
def test_derivatives_match_finite_differences(theta) -> None:
    xi = np.linspace(-2, 2, 41)
    h = 1e-5

    numeric = (phi(theta, xi + h) - phi(theta, xi - h)) / (2 * h)
    numeric2 = (dphi(theta, xi + h) - dphi(theta, xi - h)) / (2 * h)

    assert np.allclose(dphi(theta, xi), numeric, atol=1e-8)
    assert np.allclose(d2phi(theta, xi), numeric2, atol=1e-7)


def test_remainder_matches_its_defining_expression() -> None:
    theta = 0.2j
    xi = np.linspace(-1.0, 1.0, 20001)
    h = xi[1] - xi[0]
    p = dphi(theta, xi)

    inner = np.gradient(p ** -0.5, h) / p
    expression = -p ** -0.5 * np.gradient(inner, h)

    interior = slice(10, -10)
    assert np.allclose(r_theta(theta, xi)[interior], expression[interior], atol=1e-5)


def test_band_angles_alternate_in_sign() -> None:
    assert DistortionParams.for_band(1, 0.2).theta == -0.2j
    assert DistortionParams.for_band(2, 0.2).theta == 0.2j
    with pytest.raises(ParameterError):
        DistortionParams.for_band(0, 0.2)


@pytest.mark.parametrize('theta, K', [
    (0.35, math.inf),
    (0.33j, math.inf),
    (0.2j, 0.1),
])
def test_inadmissible_angles_raise(theta, K) -> None:
    with pytest.raises(ParameterError):
        check_theta(theta, K)


def test_min_dphi_bound() -> None:
    assert DistortionParams(0.2j).min_dphi_bound() == 1.0
    assert DistortionParams(0.1).min_dphi_bound() == pytest.approx(1 - 0.1 * math.pi)


def test_sqrt_dphi_rejects_left_half_plane() -> None:
    with pytest.raises(ParameterError):
        sqrt_dphi(0.5, np.linspace(0, 2, 9))


def test_apply_U_is_unitary_on_gaussians() -> None:
    grid = GridSpec(L=8.0, N=1601)
    f = np.exp(-grid.points ** 2)

    g = apply_U(0.1, f, grid)

    assert discrete_norm(g, grid) == pytest.approx(discrete_norm(f, grid), rel=1e-6)
    assert np.array_equal(apply_U(0.0, f, grid), f.astype(complex))


def test_apply_U_errors() -> None:
    grid = GridSpec(L=7.5, N=301)
    f = np.ones(grid.N)

    with pytest.raises(ParameterError):
        apply_U(0.1j, f, grid)
    with pytest.raises(GridError):
        apply_U(0.1, f[:-1], grid)
    with pytest.raises(DomainError):
        apply_U(-0.2, f, grid)


def test_remainder_is_two_periodic() -> None:
    xi = np.linspace(-3.0, 3.0, 601)

    for theta in (0.2j, -0.25j, 0.1):
        assert np.allclose(r_theta(theta, xi + 2.0), r_theta(theta, xi), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('delta', [0.05, 0.2, 0.3])
def test_imaginary_distortion_keeps_differences_in_a_sector(delta) -> None:
    theta = 1j * delta
    xi, eta = np.meshgrid(np.linspace(-3.0, 3.0, 241), np.linspace(-3.0, 3.0, 241))
    diff = phi(theta, xi) - phi(theta, eta)
    k = np.round((xi - eta) / 2.0)

    bound = math.pi * delta * np.abs(diff.real - 2.0 * k)

    assert np.all(np.abs(diff.imag) <= bound + 1e-12)
    assert math.pi * delta < 1.0

import numpy as np
import pytest

from framehydro.cli_io.initial import make_initial
from framehydro.elasticity import (derive_coefficients, elastic_energy, energy_breakdown,
                                   energy_density, frame_gradients, gradient_check_oracle,
                                   molecular_fields, rotation_generator_from_molecular,
                                   rotational_derivatives)
from framehydro.errors import InvalidCoefficients
from framehydro.frame import dot, random_rotations
from framehydro.grid import Grid2D

GENERIC_K = [1.3, 0.7, 2.1, 0.9, 1.6, 0.8, 1.1, 1.9, 0.6, 1.4, 1.2, 0.75]


def twist_frame(grid, amplitude):
    p, _ = make_initial({"preset": "twist", "amplitude": amplitude, "mode": 1}, grid)
    return p


def smooth_frame(grid, seed):
    p, _ = make_initial({"preset": "random_smooth", "seed": seed, "band": 3,
                         "amplitude": 1.0, "v_amplitude": 0.0}, grid)
    return p


def test_derived_split_frozen_values():
    c = derive_coefficients(GENERIC_K)
    # gamma_i = min over (K_i, K_{i+3}, K_{i+6}, K_{i+9})
    np.testing.assert_allclose(c.gamma, [0.9, 0.7, 0.6])
    np.testing.assert_allclose(c.k_div, [0.4, 0.0, 1.5])
    assert c.k_twist.min() >= 0
    assert c.k_twist[0, 0] == pytest.approx(0.0)          # K4 - gamma1
    assert c.k_twist[2, 0] == pytest.approx(1.1 - 0.9)    # K7 - gamma1
    assert c.k_twist[1, 0] == pytest.approx(1.4 - 0.9)    # K10 - gamma1


def test_one_constant_has_no_w_part():
    c = derive_coefficients(np.ones(12))
    np.testing.assert_array_equal(c.gamma, np.ones(3))
    assert not c.k_div.any() and not c.k_twist.any()


def test_invalid_coefficients_name_the_offender():
    k = np.ones(12)
    k[3] = -1.0
    with pytest.raises(InvalidCoefficients, match="K4"):
        derive_coefficients(k)
    k = np.ones(12)
    k[[1, 4, 7, 10]] = [0.0, 1.0, 1.0, 1.0]
    with pytest.raises(InvalidCoefficients, match="gamma2"):
        derive_coefficients(k)
    with pytest.raises(InvalidCoefficients):
        derive_coefficients(np.ones(11))


@pytest.mark.parametrize("amp", [0.3, 0.8])
def test_twist_energy_closed_form(amp):
    # rotation about n1 by amp*sin(x): F = (K5 + K6) pi^2 amp^2
    grid = Grid2D(32, 32)
    p = twist_frame(grid, amp)
    K = np.array(GENERIC_K)
    c = derive_coefficients(K)
    want = (K[4] + K[5]) * np.pi**2 * amp**2
    assert elastic_energy(grid, p, c) == pytest.approx(want, rel=1e-12)
    br = energy_breakdown(grid, p, c)
    assert br.total == pytest.approx(want, rel=1e-12)
    assert elastic_energy(grid, p, derive_coefficients(np.ones(12))) == pytest.approx(
        2 * np.pi**2 * amp**2, rel=1e-12)


def test_twist_rotational_derivative_closed_form():
    grid = Grid2D(32, 32)
    amp = 0.8
    p = twist_frame(grid, amp)
    h = molecular_fields(grid, p, derive_coefficients(np.ones(12)))
    lf = rotational_derivatives(p, h)
    x, _ = grid.coords()
    np.testing.assert_allclose(lf[0], 2 * amp * np.sin(x), atol=1e-12)
    np.testing.assert_allclose(lf[1:], 0.0, atol=1e-12)


def test_rotational_derivative_is_projection_of_generator(grid32, rng):
    p = smooth_frame(grid32, 3)
    h = molecular_fields(grid32, p, derive_coefficients(GENERIC_K))
    g = rotation_generator_from_molecular(p, h)
    lf = rotational_derivatives(p, h)
    for k in range(3):
        np.testing.assert_allclose(dot(g, p[k]), -lf[k], atol=1e-11)


@pytest.mark.parametrize("K", [np.ones(12), GENERIC_K], ids=["one-constant", "generic"])
def test_fifteen_term_and_rewritten_forms_agree(K):
    grid = Grid2D(32, 32)
    c = derive_coefficients(K)
    for seed in range(3):
        br = energy_breakdown(grid, smooth_frame(grid, seed), c)
        assert br.total == pytest.approx(br.rewritten_total, rel=1e-10)
        assert np.abs(br.surface).max() <= 1e-10 * br.total


@pytest.mark.parametrize("K", [np.ones(12), GENERIC_K], ids=["one-constant", "generic"])
def test_molecular_field_is_minus_energy_gradient(K, rng):
    grid = Grid2D(16, 16)
    c = derive_coefficients(K)
    p = smooth_frame(grid, 7)
    h = molecular_fields(grid, p, c)
    for _ in range(3):
        direction = rng.normal(size=p.shape)
        fd = gradient_check_oracle(grid, p, c, direction, 1e-5)
        analytic = -grid.inner(h, direction)
        assert fd == pytest.approx(analytic, rel=1e-6)


def test_gradient_oracle_step_bounds(grid32):
    p = smooth_frame(grid32, 0)
    with pytest.raises(ValueError):
        gradient_check_oracle(grid32, p, derive_coefficients(np.ones(12)), p, 1e-2)


def test_energy_density_nonnegative_and_invariant(grid32, rng):
    c = derive_coefficients(GENERIC_K)
    p = smooth_frame(grid32, 11)
    assert energy_density(grid32, p, c).min() >= 0
    # uniform rotation of the frame labels in space leaves the Dirichlet part unchanged,
    # and a constant frame has zero energy
    assert elastic_energy(grid32, random_rotations(rng, 1)[..., 0][..., None, None]
                          * np.ones((1, 1) + grid32.shape), c) == pytest.approx(0, abs=1e-14)


def test_frame_gradient_curl_and_divergence(grid32):
    x, y = grid32.coords()
    p = np.zeros((3, 3) + grid32.shape)
    p[0, 0] = np.sin(x)
    p[0, 1] = np.cos(y)
    p[0, 2] = np.sin(x + y)
    g = frame_gradients(grid32, p)
    np.testing.assert_allclose(g.div[0], np.cos(x) - np.sin(y), atol=1e-12)
    np.testing.assert_allclose(g.curl[0], np.stack([np.cos(x + y), -np.cos(x + y),
                                                    np.zeros_like(x)]), atol=1e-12)

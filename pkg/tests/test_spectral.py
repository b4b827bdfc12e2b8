"""
Tests for the periodic grid and the spectral operators.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.errors import GridMismatchError  # noqa: E402
from cascade_scope.fields import (  # noqa: E402
    Grid,
    VectorField,
    dealias,
    divergence_error,
    inner_product,
    leray_project,
    nonlinear_term,
    physical_inner,
    poisson_residual,
    pressure_from_velocity,
    random_solenoidal,
    sobolev_norm,
    stokes_power,
    taylor_green,
    to_spectral,
    velocity_gradient,
)


def _noise(grid: Grid, seed: int) -> VectorField:
    data = np.random.default_rng(seed).standard_normal((3,) + grid.shape)
    return to_spectral(VectorField.from_physical(grid, data))


class TestGrid:
    @pytest.mark.parametrize("N", [7, 6, 15, 12, 24])
    def test_rejects_non_power_of_two(self, N):
        with pytest.raises(ValueError):
            Grid(N)

    def test_scales(self):
        grid = Grid(16, 4.0)
        assert grid.R0 == pytest.approx(1.0)
        assert grid.dx == pytest.approx(0.25)
        assert grid.volume == pytest.approx(64.0)

    def test_dealias_mask_keeps_two_thirds(self):
        grid = Grid(16)
        kept = np.abs(grid.k_int) <= 5
        assert grid.dealias_mask.sum() == kept.sum() ** 3


def test_parseval_matches_rectangle_rule():
    grid = Grid(16)
    v = random_solenoidal(grid, seed=3)
    assert inner_product(v, v) == pytest.approx(physical_inner(v, v), rel=1e-12)


def test_taylor_green_norms():
    grid = Grid(16)
    u = taylor_green(grid)
    assert divergence_error(u) < 1e-12
    # ‖u‖² = L³/2 and every mode has |κ|² = 2 on the 2π box
    assert sobolev_norm(u, 0.0) ** 2 == pytest.approx(grid.volume / 2.0, rel=1e-12)
    assert sobolev_norm(u, 1.0) ** 2 == pytest.approx(grid.volume, rel=1e-12)


def test_taylor_green_is_steady_euler():
    grid = Grid(16)
    u = taylor_green(grid)
    assert sobolev_norm(nonlinear_term(u), 0.0) < 1e-12 * sobolev_norm(u, 0.0)


def test_velocity_gradient_of_taylor_green():
    grid = Grid(16)
    u = taylor_green(grid)
    X, Y, _ = grid.mesh
    grad = velocity_gradient(u)
    np.testing.assert_allclose(grad[0, 0], -np.sin(X) * np.sin(Y) * np.ones(grid.shape), atol=1e-12)
    np.testing.assert_allclose(grad[0, 1], np.cos(X) * np.cos(Y) * np.ones(grid.shape), atol=1e-12)


class TestLeray:
    def test_projection_removes_divergence(self):
        grid = Grid(16)
        p = leray_project(_noise(grid, 0))
        assert divergence_error(p) < 1e-12

    def test_idempotent_and_orthogonal(self):
        grid = Grid(16)
        raw = _noise(grid, 1)
        p = leray_project(raw)
        np.testing.assert_allclose(leray_project(p).data, p.data, atol=1e-14)
        assert abs(inner_product(p, raw - p)) < 1e-12 * inner_product(raw, raw)

    def test_requires_spectral_field(self):
        grid = Grid(8)
        phys = VectorField.from_physical(grid, (np.zeros(grid.shape),) * 3)
        with pytest.raises(ValueError):
            leray_project(phys)


def test_dealias_is_idempotent():
    grid = Grid(16)
    raw = _noise(grid, 2)
    once = dealias(raw)
    np.testing.assert_array_equal(dealias(once).data, once.data)


class TestStokesPowers:
    def test_inverse_powers_cancel(self):
        grid = Grid(16)
        v = random_solenoidal(grid, seed=4)
        back = stokes_power(stokes_power(v, 1.0), -1.0)
        np.testing.assert_allclose(back.data, v.data, atol=1e-14)

    def test_negative_power_needs_zero_mean(self):
        grid = Grid(8)
        data = np.zeros((3,) + grid.shape, dtype=complex)
        data[0, 0, 0, 0] = 1.0
        data[1, 1, 0, 0] = 0.5
        v = VectorField(grid, data, mean_zero=False)
        with pytest.raises(ValueError):
            sobolev_norm(v, -1.0)

    def test_mean_zero_field_rejects_mean_mode(self):
        grid = Grid(8)
        data = np.zeros((3,) + grid.shape, dtype=complex)
        data[0, 0, 0, 0] = 1.0
        with pytest.raises(ValueError):
            VectorField(grid, data)


def test_grid_mismatch_is_reported():
    with pytest.raises(GridMismatchError):
        inner_product(random_solenoidal(Grid(8), 0), random_solenoidal(Grid(16), 0))


def test_nonlinear_term_rejects_divergent_field():
    grid = Grid(16)
    with pytest.raises(ValueError):
        nonlinear_term(_noise(grid, 5))


def test_pressure_solves_poisson():
    grid = Grid(16)
    u = random_solenoidal(grid, seed=6)
    p = pressure_from_velocity(u)
    assert poisson_residual(u, p) < 1e-10
    assert abs(p.spectral().data[0, 0, 0]) == 0.0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_nonlinear_term_conserves_energy(seed):
    grid = Grid(16)
    u = random_solenoidal(grid, seed=seed)
    scale = sobolev_norm(u, 0.0) ** 2 * sobolev_norm(u, 1.0)
    assert abs(inner_product(nonlinear_term(u), u)) < 1e-12 * scale


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_random_solenoidal_is_dealiased_and_solenoidal(seed):
    grid = Grid(8)
    u = random_solenoidal(grid, seed=seed)
    assert divergence_error(u) < 1e-12
    np.testing.assert_array_equal(dealias(u).data, u.data)

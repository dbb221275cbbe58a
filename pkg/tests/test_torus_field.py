import math

import numpy as np
import pytest

from app.core.exceptions import DomainError, GridError
from app.numerics.torus_field import (
    ScalarField,
    TorusGrid,
    VectorField,
    divergence,
    grad,
    gradient_matrices,
    integrate,
    lp_norm,
    p_laplacian,
    sobolev_norm,
    weak_pairing,
)
from tests.conftest import random_field

def test_grid_geometry():
    grid = TorusGrid(3, 8)
    assert grid.shape == (8, 8, 8)
    assert grid.cell_weight == pytest.approx(1.0 / 512)
    coords = grid.coordinates()
    assert coords[0][0, 0, 0] == pytest.approx(1.0 / 16)
    assert coords[2][0, 0, 7] == pytest.approx(15.0 / 16)

@pytest.mark.parametrize('n, points', [(1, 8), (4, 8), (3, 3)])
def test_invalid_grid(n, points):
    with pytest.raises(GridError):
        TorusGrid(n, points)

def test_field_rejects_non_finite(grid3):
    values = np.zeros(grid3.shape)
    values[0, 0, 0] = math.nan
    with pytest.raises(DomainError):
        ScalarField(grid3, values)

def test_fields_on_different_grids_do_not_mix(grid3):
    other = TorusGrid(3, 8)
    with pytest.raises(GridError):
        ScalarField.constant(grid3, 1.0) + ScalarField.constant(other, 1.0)

def test_constant_integral_and_norm(grid3):
    u = ScalarField.constant(grid3, 2.0)
    assert integrate(u) == pytest.approx(2.0, rel=1e-15)
    assert lp_norm(u, 3.0) == pytest.approx(2.0, rel=1e-15)

def test_gradient_of_constant_vanishes(grid3):
    gradient = grad(ScalarField.constant(grid3, 3.5))
    assert np.all(gradient.values == 0.0)

def test_divergence_is_negative_adjoint_of_gradient(grid3, rng):
    u = random_field(grid3, rng)
    w = VectorField(grid3, rng.standard_normal((3,) + grid3.shape))
    lhs = integrate(ScalarField(grid3, divergence(w).values * u.values))
    rhs = -grid3.cell_weight * float(np.sum(w.values * grad(u).values))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

def test_gradient_matrices_match_forward_differences(grid2, rng):
    u = random_field(grid2, rng)
    matrices = gradient_matrices(grid2)
    for axis, matrix in enumerate(matrices):
        expected = grad(u).values[axis].ravel()
        np.testing.assert_allclose(matrix @ u.values.ravel(), expected, rtol=1e-12, atol=1e-12)

def test_laplacian_of_cosine_wave():
    grid = TorusGrid(3, 8)
    u = ScalarField(grid, np.cos(2.0 * math.pi * grid.coordinates()[0]))
    symbol = (2.0 - 2.0 * math.cos(2.0 * math.pi * grid.spacing)) / grid.spacing ** 2
    np.testing.assert_allclose(p_laplacian(u, 2.0).values, symbol * u.values, atol=1e-9)

@pytest.mark.parametrize('p', [1.5, 2.0, 3.0])
def test_integration_by_parts_duality(p):
    grid = TorusGrid(3, 8)
    generator = np.random.default_rng(7)
    for _ in range(100):
        u = random_field(grid, generator)
        v = random_field(grid, generator)
        lhs = integrate(ScalarField(grid, p_laplacian(u, p).values * v.values))
        rhs = weak_pairing(u, v, p)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

@pytest.mark.parametrize('n, points', [(2, 16), (3, 8)])
@pytest.mark.parametrize('p', [1.5, 2.0, 3.0])
def test_p_laplacian_integrates_to_zero(n, points, p):
    grid = TorusGrid(n, points)
    generator = np.random.default_rng(3)
    fields = [random_field(grid, generator), ScalarField(grid, generator.standard_normal(grid.shape))]
    for u in fields:
        laplacian = p_laplacian(u, p)
        assert abs(integrate(laplacian)) <= 1e-12 * max(1.0, float(np.max(np.abs(laplacian.values))))

@pytest.mark.parametrize('n', [2, 3])
def test_gradient_of_sine_wave_is_first_order(n):
    errors = []
    for points in (32, 64):
        grid = TorusGrid(n, points)
        x1 = grid.coordinates()[0]
        component = grad(ScalarField(grid, np.sin(2.0 * math.pi * x1))).values[0]
        error = float(np.max(np.abs(component - 2.0 * math.pi * np.cos(2.0 * math.pi * x1))))
        # 테일러 나머지 (spacing/2)·max|u''|
        assert error <= 2.0 * math.pi ** 2 * grid.spacing * (1.0 + 1e-9)
        errors.append(error)
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)

@pytest.mark.parametrize('n, points', [(2, 8), (3, 6)])
def test_gradient_of_sawtooth(n, points):
    grid = TorusGrid(n, points)
    index = np.arange(points, dtype=np.float64).reshape((points,) + (1,) * (n - 1))
    u = ScalarField(grid, np.broadcast_to(index / points, grid.shape).copy())
    components = grad(u).values

    np.testing.assert_allclose(components[0][:-1], 1.0, rtol=1e-12)
    np.testing.assert_allclose(components[0][-1], -(points - 1.0), rtol=1e-12)
    for axis in range(1, n):
        np.testing.assert_array_equal(components[axis], 0.0)

@pytest.mark.parametrize('p', [2.0, 2.5, 2.9])
def test_operator_monotonicity(p):
    grid = TorusGrid(3, 8)
    generator = np.random.default_rng(11)
    for _ in range(200):
        u = random_field(grid, generator)
        v = random_field(grid, generator)
        difference = p_laplacian(u, p).values - p_laplacian(v, p).values
        pairing = grid.cell_weight * float(np.sum(difference * (u.values - v.values)))
        scale = grid.cell_weight * float(np.sum(np.abs(difference * (u.values - v.values))))
        assert pairing >= -1e-12 * max(1.0, scale)

def test_degenerate_exponent_rejected(grid3):
    with pytest.raises(DomainError):
        p_laplacian(ScalarField.constant(grid3, 1.0), 1.0)

def test_sobolev_norm_of_constant(grid3):
    assert sobolev_norm(ScalarField.constant(grid3, 2.0), 2.0) == pytest.approx(2.0, rel=1e-14)

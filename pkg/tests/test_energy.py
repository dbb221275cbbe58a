import math

import numpy as np
import pytest

from app.core.exceptions import DomainError, GridError, SingularTermError
from app.numerics.energy import (
    ProblemData,
    SubcriticalParams,
    constant_field_energy,
    critical_energy,
    energy,
    first_variation,
    g_q,
    split_identity_gap,
)
from app.numerics.torus_field import ScalarField, TorusGrid, integrate
from tests.conftest import constant_problem, random_field

def _varying_problem(grid: TorusGrid, p: float = 2.0) -> ProblemData:
    x1, x2 = grid.coordinates()[:2]
    f = ScalarField(grid, np.cos(2.0 * math.pi * x1) - 0.6)
    a = ScalarField(grid, 0.2 + 0.1 * np.sin(2.0 * math.pi * x2))
    return ProblemData(n=grid.n, p=p, h=-0.7, f=f, a=a)

def _naive_energy(u: np.ndarray, prob: ProblemData, q: float, eps: float) -> float:
    # 격자점마다 차례로 더하는 직선형 구현
    grid = prob.grid
    size = grid.points_per_axis
    p = prob.p
    total = 0.0
    for index in np.ndindex(*grid.shape):
        squared = 0.0
        for axis in range(grid.n):
            neighbour = list(index)
            neighbour[axis] = (neighbour[axis] + 1) % size
            squared += ((u[tuple(neighbour)] - u[index]) / grid.spacing) ** 2
        value = u[index]
        total += squared ** (p / 2.0) / p
        total += prob.h * abs(value) ** p / p
        total -= prob.f.values[index] * abs(value) ** q / q
        total += prob.a.values[index] / (value * value + eps) ** (q / 2.0) / q
    return total * grid.cell_weight

def test_problem_validation(grid3):
    f = ScalarField.constant(grid3, -1.0)
    a = ScalarField.constant(grid3, 0.1)
    with pytest.raises(DomainError):
        ProblemData(n=3, p=3.0, h=-1.0, f=f, a=a)
    with pytest.raises(DomainError):
        ProblemData(n=3, p=2.0, h=0.5, f=f, a=a)
    with pytest.raises(DomainError):
        ProblemData(n=3, p=2.0, h=-1.0, f=f, a=ScalarField.constant(grid3, -0.1))
    with pytest.raises(GridError):
        ProblemData(n=3, p=2.0, h=-1.0, f=f, a=ScalarField.constant(TorusGrid(3, 8), 0.1))

def test_exponents(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.0)
    assert prob.p_star == pytest.approx(6.0)
    assert prob.p_flat == pytest.approx(4.0)

def test_subcritical_range(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.0)
    SubcriticalParams(5.0, 0.1).check_subcritical(prob)
    SubcriticalParams.critical(prob).check_subcritical(prob)
    with pytest.raises(DomainError):
        SubcriticalParams(3.5, 0.1).check_subcritical(prob)
    with pytest.raises(DomainError):
        SubcriticalParams(6.0, 0.1).check_subcritical(prob)

def test_only_h_term_survives(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, 0.0, 0.0)
    u = ScalarField.constant(grid3, 1.0)
    assert energy(u, prob, SubcriticalParams(4.0, 0.1)) == pytest.approx(-0.5, rel=1e-15)
    np.testing.assert_allclose(first_variation(u, prob, SubcriticalParams(4.0, 0.1)).values, -1.0, rtol=1e-15)

def test_matches_naive_quadrature():
    grid = TorusGrid(3, 8)
    prob = _varying_problem(grid, p=2.5)
    u = random_field(grid, np.random.default_rng(3), shift=0.2)
    sub = SubcriticalParams(4.0, 0.1)
    assert energy(u, prob, sub) == pytest.approx(_naive_energy(u.values, prob, 4.0, 0.1), rel=1e-12)

_CONSTANT_CASES = [(k, q, eps) for k in (0.1, 1.0, 7.5, 40.0) for q in (4.5, 5.5) for eps in (0.0, 1e-3, 0.5)][:20]

@pytest.mark.parametrize('k, q, eps', _CONSTANT_CASES)
def test_constant_field_energy_closed_form(grid3, k, q, eps):
    prob = _varying_problem(grid3)
    u = ScalarField.constant(grid3, k ** (1.0 / q))
    expected = constant_field_energy(k, prob, SubcriticalParams(q, eps))
    assert energy(u, prob, SubcriticalParams(q, eps)) == pytest.approx(expected, rel=1e-12)

def test_constant_field_energy_rejects_non_positive_k(grid3):
    with pytest.raises(DomainError):
        constant_field_energy(0.0, _varying_problem(grid3), SubcriticalParams(5.0, 0.1))

@pytest.mark.parametrize('p', [2.0, 2.5])
def test_first_variation_matches_finite_differences(grid3, p):
    prob = _varying_problem(grid3, p=p)
    sub = SubcriticalParams(4.0, 0.1)
    generator = np.random.default_rng(17)
    t = 1e-6

    for _ in range(25):
        u = random_field(grid3, generator, shift=1.5)
        phi = random_field(grid3, generator)
        forward = energy(u + t * phi, prob, sub)
        backward = energy(u - t * phi, prob, sub)
        numeric = (forward - backward) / (2.0 * t)
        exact = integrate(first_variation(u, prob, sub) * phi)
        assert numeric == pytest.approx(exact, rel=1e-5, abs=1e-9)

def test_constant_critical_solution_has_zero_variation(grid3, root):
    u0 = root(3, 2.0, -1.0, -1.0, 0.05)
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.05)
    variation = first_variation(ScalarField.constant(grid3, u0), prob, SubcriticalParams.critical(prob))
    np.testing.assert_allclose(variation.values, 0.0, atol=1e-11)

def test_energy_is_even(grid3, rng):
    prob = _varying_problem(grid3)
    sub = SubcriticalParams(5.0, 1e-2)
    for _ in range(5):
        u = random_field(grid3, rng)
        assert energy(-u, prob, sub) == pytest.approx(energy(u, prob, sub), rel=1e-14)
        # |u| 의 이산 기울기는 u 의 것보다 크지 않다
        value = energy(u, prob, sub)
        assert energy(abs(u), prob, sub) <= value + 1e-14 * (1.0 + abs(value))

def test_singular_term_at_zero(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    values = np.ones(grid3.shape)
    values[2, 3, 1] = 0.0
    u = ScalarField(grid3, values)
    critical = SubcriticalParams.critical(prob)

    assert energy(u, prob, critical) == math.inf
    assert critical_energy(u, prob) == math.inf
    with pytest.raises(SingularTermError):
        first_variation(u, prob, critical)

def test_energy_blows_up_as_eps_vanishes(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    values = np.ones(grid3.shape)
    values[0, 0, 0] = 0.0
    u = ScalarField(grid3, values)
    energies = [energy(u, prob, SubcriticalParams(5.0, 10.0 ** -j)) for j in range(1, 7)]
    assert all(later > earlier for earlier, later in zip(energies, energies[1:]))

def test_g_q_direct_substitution(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -3.0, 0.0)
    u = ScalarField.constant(grid3, 1.0)
    assert g_q(u, prob, SubcriticalParams(4.0, 0.1)) == pytest.approx(0.25, rel=1e-14)

def test_g_q_without_negative_part(grid3, rng):
    prob = constant_problem(grid3, 2.0, -1.0, 2.0, 0.0)
    u = random_field(grid3, rng, shift=0.5)
    no_f = constant_problem(grid3, 2.0, -1.0, 0.0, 0.0)
    sub = SubcriticalParams(4.0, 0.1)
    assert g_q(u, prob, sub) == pytest.approx(energy(u, no_f, sub), rel=1e-13)

def test_split_identity(grid3, rng):
    prob = _varying_problem(grid3)
    sub = SubcriticalParams(5.0, 1e-2)
    for _ in range(20):
        u = random_field(grid3, rng, shift=0.3)
        scale = abs(energy(u, prob, sub)) + 1.0
        assert abs(split_identity_gap(u, prob, sub)) <= 1e-12 * scale

@pytest.mark.parametrize('f0', [-1.0, 0.5])
def test_critical_energy_of_unit_field(grid3, f0):
    prob = constant_problem(grid3, 2.0, -1.0, f0, 0.0)
    u = ScalarField.constant(grid3, 1.0)
    assert critical_energy(u, prob) == pytest.approx(-0.5 - f0 / 6.0, rel=1e-14)

def test_critical_energy_at_constant_solution(grid3, root):
    u0 = root(3, 2.0, -1.0, -1.0, 0.05)
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.05)
    expected = -0.5 * u0 ** 2 + u0 ** 6 / 6.0 + 0.05 / 6.0 / u0 ** 6
    assert critical_energy(ScalarField.constant(grid3, u0), prob) == pytest.approx(expected, rel=1e-13)

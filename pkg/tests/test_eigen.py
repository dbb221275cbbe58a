import math

import numpy as np
import pytest

from app.core.exceptions import DomainError, InfeasibleConstraintError
from app.numerics.eigen import EigenSolver, _dirichlet_pair, lambda_f, rayleigh_quotient
from app.numerics.energy import ProblemData, SubcriticalParams
from app.numerics.torus_field import ScalarField, TorusGrid
from tests.conftest import constant_problem, random_field

ETAS = [0.2, 0.4, 0.6, 0.8, 1.2]

def _dense_oracle(grid: TorusGrid, free: np.ndarray) -> float:
    # 자유 격자점끼리만 연결한 5점/7점 라플라시안을 직접 조립
    points = [index for index in np.ndindex(*grid.shape) if free[index]]
    position = {index: row for row, index in enumerate(points)}
    matrix = np.zeros((len(points), len(points)))
    scale = 1.0 / grid.spacing ** 2

    for index, row in position.items():
        matrix[row, row] = 2.0 * grid.n * scale
        for axis in range(grid.n):
            for step in (-1, 1):
                neighbour = list(index)
                neighbour[axis] = (neighbour[axis] + step) % grid.points_per_axis
                column = position.get(tuple(neighbour))
                if column is not None:
                    matrix[row, column] -= scale

    return float(np.linalg.eigvalsh(matrix)[0])

def _layer_problem(grid: TorusGrid, level: float) -> ProblemData:
    x1 = grid.coordinates()[0]
    f = ScalarField(grid, np.cos(2.0 * math.pi * x1) - level)
    return ProblemData(n=grid.n, p=2.0, h=-1.0, f=f, a=ScalarField.constant(grid, 0.1))

def test_masked_laplacian_matches_dense_oracle():
    grid = TorusGrid(2, 16)
    x1, x2 = grid.coordinates()
    free = np.cos(2.0 * math.pi * x1) + np.cos(2.0 * math.pi * x2) >= 0.5
    value, vector = _dirichlet_pair(grid, free)

    assert value == pytest.approx(_dense_oracle(grid, free), rel=1e-6)
    assert np.all(vector[~free] == 0.0)
    assert np.all(vector >= 0.0)

def test_two_free_layers(quick_cfg):
    grid = TorusGrid(3, 8)
    result = lambda_f(_layer_problem(grid, 0.92), quick_cfg)
    assert result.value == pytest.approx(64.0, rel=1e-8)
    assert result.converged
    assert rayleigh_quotient(result.argmin, 2.0) == pytest.approx(64.0, rel=1e-8)

def test_lambda_f_matches_dense_oracle_in_three_dimensions(grid3, quick_cfg):
    prob = _layer_problem(grid3, 0.5)
    free = prob.f.values >= 0.0
    assert lambda_f(prob, quick_cfg).value == pytest.approx(_dense_oracle(grid3, free), rel=1e-6)

def test_lambda_f_limits(grid3, quick_cfg):
    assert lambda_f(constant_problem(grid3, 2.0, -1.0, -1.0, 0.1), quick_cfg).value == math.inf
    assert lambda_f(constant_problem(grid3, 2.0, -1.0, 0.5, 0.1), quick_cfg).value == 0.0

def test_rayleigh_quotient_is_scale_invariant(grid3, rng):
    u = random_field(grid3, rng)
    assert rayleigh_quotient(3.0 * u, 2.0) == pytest.approx(rayleigh_quotient(u, 2.0), rel=1e-13)
    with pytest.raises(DomainError):
        rayleigh_quotient(ScalarField.constant(grid3, 0.0), 2.0)

def test_zero_negative_part_gives_zero(grid3, quick_cfg):
    solver = EigenSolver(constant_problem(grid3, 2.0, -1.0, 0.5, 0.1), quick_cfg)
    assert solver.lambda_f_eta_q(SubcriticalParams(5.0, 0.0), 0.5).value == 0.0

def test_non_positive_eta_rejected(grid3, quick_cfg):
    solver = EigenSolver(_layer_problem(grid3, 0.5), quick_cfg)
    with pytest.raises(DomainError):
        solver.lambda_f_eta_q(SubcriticalParams(5.0, 0.0), 0.0)

def test_infeasible_equality_constraint(grid3, quick_cfg):
    solver = EigenSolver(_layer_problem(grid3, 0.5), quick_cfg)
    # ηF 가 max|f⁻| 를 넘으면 등식 제약은 만족될 수 없다
    with pytest.raises(InfeasibleConstraintError):
        solver.lambda_f_eta_q(SubcriticalParams(5.0, 0.0), 10.0, inequality=False)

def test_eta_scan_is_monotone_and_bounded(grid3, quick_cfg):
    solver = EigenSolver(_layer_problem(grid3, 0.5), quick_cfg)
    scan = solver.eta_scan(SubcriticalParams(5.0, 0.0), ETAS)
    values = [sample.value for sample in scan.samples]

    assert [sample.eta for sample in scan.samples] == ETAS
    assert all(later <= earlier + 1e-6 for earlier, later in zip(values, values[1:]))
    assert all(value <= scan.lambda_f + 1e-6 for value in values)
    # 상수 필드는 η ≥ 1 에서 부등식 제약을 만족한다
    assert values[-1] == pytest.approx(0.0, abs=1e-6)

def test_eta0_is_largest_qualifying_eta(grid3, quick_cfg):
    solver = EigenSolver(_layer_problem(grid3, 0.5), quick_cfg)
    scan = solver.eta_scan(SubcriticalParams(5.0, 0.0), ETAS, delta=1e9)
    assert scan.eta0 == ETAS[-1]

    strict = solver.eta_scan(SubcriticalParams(5.0, 0.0), ETAS, delta=0.0)
    qualifying = [sample.eta for sample in strict.samples if sample.value >= strict.lambda_f]
    assert strict.eta0 == (qualifying[-1] if qualifying else None)

def test_eta_scan_rejects_unsorted(grid3, quick_cfg):
    with pytest.raises(DomainError):
        EigenSolver(_layer_problem(grid3, 0.5), quick_cfg).eta_scan(SubcriticalParams(5.0, 0.0), [0.5, 0.25])

@pytest.mark.parametrize('eta', [0.3, 0.7])
def test_equality_and_inequality_agree_below_one(grid3, quick_cfg, eta):
    solver = EigenSolver(_layer_problem(grid3, 0.5), quick_cfg)
    sub = SubcriticalParams(5.0, 0.0)
    equality = solver.lambda_f_eta_q(sub, eta, inequality=False)
    inequality = solver.lambda_f_eta_q(sub, eta, inequality=True)
    assert equality.value == pytest.approx(inequality.value, rel=1e-6, abs=1e-6)
    assert equality.constraint_residual <= 1e-8

def test_eta_scan_without_negative_region_criterion(grid3, quick_cfg):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    scan = EigenSolver(prob, quick_cfg).eta_scan(SubcriticalParams(5.0, 0.0), [1.0, 1.5])
    assert scan.lambda_f == math.inf
    assert scan.samples[-1].value == pytest.approx(0.0, abs=1e-8)
    # λ_f = +∞ 이면 λ > |h| 를 기준으로 하므로 λ = 0 인 표본은 η₀ 가 될 수 없다
    assert scan.eta0 is None

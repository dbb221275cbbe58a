import math

import numpy as np
import pytest

from app.core.exceptions import DomainError
from app.core.run_config import SolverConfig
from app.numerics.energy import ProblemData, SubcriticalParams, first_variation
from app.numerics.minimize import ConstrainedMinimizer
from app.numerics.thresholds import GateInputs, lemma22_lower_bound, sobolev_K, theorem_gate
from app.numerics.torus_field import ScalarField, TorusGrid
from app.numerics.solver import (
    ContinuationSchedule,
    ContinuationStage,
    find_zero_level,
    integral_identity_check,
    mountain_pass,
    rescale_problem,
    single_solution_pipeline,
    two_solution_pipeline,
    unscale_report,
    weak_residual,
)
from tests.conftest import constant_problem, random_field

def _demo_problem(points: int = 8, a0: float = 0.02) -> ProblemData:
    grid = TorusGrid(3, points)
    f = ScalarField(grid, np.cos(2.0 * math.pi * grid.coordinates()[0]) - 0.92)
    return ProblemData(n=3, p=2.0, h=-0.25, f=f, a=ScalarField.constant(grid, a0))

def _critical_only(prob: ProblemData) -> ContinuationSchedule:
    return ContinuationSchedule(stages=(), final=ContinuationStage(0.0, prob.p_star))

def test_rescale_preserves_ratio_and_balances_h():
    prob = _demo_problem()
    result = rescale_problem(prob, 1.0)
    scaled = result.problem

    assert scaled.sup_f / scaled.F_minus == pytest.approx(prob.sup_f / prob.F_minus, rel=1e-14)
    assert abs(scaled.h) == pytest.approx(scaled.F_minus / scaled.p_star, rel=1e-12)
    assert result.c ** (prob.p_star - prob.p) == pytest.approx(prob.p_star * abs(prob.h) / prob.F_minus, rel=1e-12)
    assert result.c_literal == pytest.approx(math.sqrt(result.c), rel=1e-12)

def test_rescale_is_identity_when_balanced(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -6.0, 0.3)
    result = rescale_problem(prob, 1.0)
    assert result.c == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(result.problem.f.values, prob.f.values, rtol=1e-14)
    np.testing.assert_allclose(result.problem.a.values, prob.a.values, rtol=1e-14)

def test_rescale_rejects_degenerate_input(grid3):
    with pytest.raises(DomainError):
        rescale_problem(constant_problem(grid3, 2.0, -1.0, 0.5, 0.1), 1.0)
    with pytest.raises(DomainError):
        rescale_problem(constant_problem(grid3, 2.0, -1.0, -1.0, 0.1), 0.0)

@pytest.mark.parametrize('a0', [0.02, 1.0])
def test_rescale_keeps_gate_verdicts(a0):
    prob = _demo_problem(a0=a0)
    scaled = rescale_problem(prob, 1.0).problem
    inputs = GateInputs(lambda_f=64.0, eta0=1.0, K=sobolev_K(3, 2.0), A=1.5)

    before = {clause.name: clause for clause in theorem_gate(prob, 'thm1', inputs).clauses}
    after = {clause.name: clause for clause in theorem_gate(scaled, 'thm1', inputs).clauses}

    assert before['∫a < condition_1_3_rhs'].passed == after['∫a < condition_1_3_rhs'].passed
    assert after['sup f/∫|f⁻| ≤ C1'].value == pytest.approx(before['sup f/∫|f⁻| ≤ C1'].value, rel=1e-14)

def test_scaled_solution_maps_back(root):
    grid = TorusGrid(3, 6)
    prob = constant_problem(grid, 2.0, -0.5, -0.8, 0.05)
    result = rescale_problem(prob, 1.0)
    scaled = result.problem

    u_scaled = root(3, 2.0, -0.5, float(scaled.f.values.flat[0]), float(scaled.a.values.flat[0]))
    u = ScalarField.constant(grid, result.c * u_scaled)
    assert weak_residual(u, prob, SubcriticalParams.critical(prob)) <= 1e-10

@pytest.mark.parametrize('p', [2.0, 2.5])
def test_constant_root_has_small_residual(root, p):
    grid = TorusGrid(3, 16)
    u0 = root(3, p, -1.0, -1.0, 0.05)
    prob = constant_problem(grid, p, -1.0, -1.0, 0.05)
    assert weak_residual(ScalarField.constant(grid, u0), prob, SubcriticalParams.critical(prob)) <= 1e-10

def test_residual_grows_under_perturbation(grid3, root, rng):
    u0 = root(3, 2.0, -1.0, -1.0, 0.05)
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.05)
    sub = SubcriticalParams.critical(prob)
    direction = random_field(grid3, rng)
    residuals = [weak_residual(ScalarField.constant(grid3, u0) + t * direction, prob, sub) for t in (0.0, 1e-4, 1e-2)]
    assert residuals[0] < residuals[1] < residuals[2]

def test_residual_of_zero_field_without_coefficients(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, 0.0, 0.0)
    assert weak_residual(ScalarField.constant(grid3, 0.0), prob, SubcriticalParams.critical(prob)) == 0.0

def test_residual_is_infinite_on_singular_field(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    assert weak_residual(ScalarField.constant(grid3, 0.0), prob, SubcriticalParams.critical(prob)) == math.inf

def test_integral_identity(grid3, root):
    u0 = root(3, 2.0, -1.0, -1.0, 0.05)
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.05)
    check = integral_identity_check(ScalarField.constant(grid3, u0), prob)
    assert check.gap <= 1e-12
    assert not check.contradiction

def test_integral_identity_flags_nonnegative_f(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, 0.5, 0.1)
    check = integral_identity_check(ScalarField.constant(grid3, 1.0), prob)
    assert check.contradiction
    with pytest.raises(DomainError):
        integral_identity_check(ScalarField.constant(grid3, 0.0), prob)

def test_schedule_validation():
    with pytest.raises(DomainError):
        ContinuationSchedule(stages=(ContinuationStage(0.1, 4.5), ContinuationStage(0.2, 5.0)))
    with pytest.raises(DomainError):
        ContinuationSchedule(stages=(ContinuationStage(0.1, 5.0), ContinuationStage(0.05, 4.5)))
    with pytest.raises(DomainError):
        ContinuationSchedule(stages=(ContinuationStage(0.1, 4.5),), final=ContinuationStage(0.01, 6.0))
    with pytest.raises(DomainError):
        ContinuationSchedule(stages=(ContinuationStage(0.0, 4.5),))

def test_default_schedule(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    schedule = ContinuationSchedule.default(prob, SolverConfig(stages=4, eps0=0.1))

    assert schedule.eps_sequence == pytest.approx([0.1, 0.05, 0.025, 0.0125])
    assert schedule.q_sequence == pytest.approx([5.0, 5.5, 5.75, 5.875])
    assert schedule.final == ContinuationStage(0.0, 6.0)
    assert schedule.all_stages[-1].critical

def test_default_schedule_rejects_bad_start(grid3):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    with pytest.raises(DomainError):
        ContinuationSchedule.default(prob, SolverConfig(q_start=3.0))

def test_zero_level_bracketing(grid3, quick_cfg):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    minimizer = ConstrainedMinimizer(prob, SubcriticalParams(5.0, 1e-2), quick_cfg)

    found = find_zero_level(minimizer, 1.0, 10.0)
    assert found.bracketed
    assert 1.0 < found.k < 10.0
    assert found.result.mu == pytest.approx(0.0, abs=1e-6)

    fallback = find_zero_level(minimizer, 10.0, 20.0)
    assert not fallback.bracketed
    assert fallback.k == 10.0

def test_mountain_pass_degenerate_path(grid3, quick_cfg):
    prob = constant_problem(grid3, 2.0, -1.0, -1.0, 0.1)
    u = ScalarField.constant(grid3, 1.0)
    report = mountain_pass(prob, SubcriticalParams(5.0, 1e-2), u, u, quick_cfg)
    assert report.flags == ('degenerate',)
    assert not report.converged
    assert report.branch == 'mountain_pass'

def test_single_pipeline_requires_negative_integral(grid3, quick_cfg):
    prob = constant_problem(grid3, 2.0, -1.0, 0.5, 0.1)
    with pytest.raises(DomainError):
        single_solution_pipeline(prob, _critical_only(prob), quick_cfg)

@pytest.mark.parametrize('p', [2.0, 2.5])
def test_constant_solution_is_fixed_point(root, p):
    grid = TorusGrid(3, 16)
    u0 = root(3, p, -1.0, -1.0, 0.05)
    prob = constant_problem(grid, p, -1.0, -1.0, 0.05)
    start = ScalarField.constant(grid, u0)

    report = single_solution_pipeline(prob, _critical_only(prob), SolverConfig(), init=start)

    assert report.converged
    assert np.max(np.abs(report.u.values - u0)) <= 1e-8
    assert report.weak_residual <= 1e-10
    assert report.min_u >= report.lemma22_bound * (1.0 - 1e-6)

def test_unscale_report_recomputes_on_original_problem(grid3, root):
    prob = constant_problem(grid3, 2.0, -0.5, -0.8, 0.05)
    result = rescale_problem(prob, 1.0)
    scaled = result.problem
    u_scaled = root(3, 2.0, -0.5, float(scaled.f.values.flat[0]), float(scaled.a.values.flat[0]))

    report = single_solution_pipeline(scaled, _critical_only(scaled), SolverConfig(), init=ScalarField.constant(grid3, u_scaled))
    restored = unscale_report(report, prob, result.c)

    np.testing.assert_allclose(restored.u.values, result.c * report.u.values, rtol=1e-15)
    assert restored.weak_residual <= 1e-5
    variation = first_variation(restored.u, prob, SubcriticalParams.critical(prob))
    assert np.max(np.abs(variation.values)) <= 1e-8

@pytest.mark.slow
def test_negative_f_regime_solves():
    grid = TorusGrid(3, 12)
    f = ScalarField(grid, -1.0 - 0.5 * np.cos(2.0 * math.pi * grid.coordinates()[0]))
    prob = ProblemData(n=3, p=2.0, h=-0.5, f=f, a=ScalarField.constant(grid, 0.1))
    cfg = SolverConfig(stages=4)

    report = single_solution_pipeline(prob, ContinuationSchedule.default(prob, cfg), cfg)

    assert report.converged
    assert report.weak_residual <= 1e-6
    assert report.min_u >= lemma22_lower_bound(prob.p, prob.p_flat, prob.h, prob.inf_f) * (1.0 - 1e-6)

@pytest.mark.slow
def test_two_solutions_are_converged_and_distinct():
    prob = _demo_problem(points=12)
    rescaled = rescale_problem(prob, 1.0)
    cfg = SolverConfig(stages=4)
    schedule = ContinuationSchedule.default(rescaled.problem, cfg)

    first, second = two_solution_pipeline(rescaled.problem, schedule, cfg, eta0=1.0)
    first = unscale_report(first, prob, rescaled.c)
    second = unscale_report(second, prob, rescaled.c)

    assert first.critical_energy < 0.0 < second.critical_energy
    assert first.distinctness >= 1e-3

    bound = lemma22_lower_bound(prob.p, prob.p_flat, prob.h, prob.inf_f)
    for report in (first, second):
        assert report.converged, report.branch
        assert report.weak_residual <= 1e-6
        assert report.min_u >= bound * (1.0 - 1e-6)

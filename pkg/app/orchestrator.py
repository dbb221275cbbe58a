import math
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from tabulate import tabulate

from app.core.config import settings
from app.core.exceptions import ConfigError, DomainError, ExprEvaluationError, ExprSyntaxError, GateFailedError, GridError
from app.core.logger import logger
from app.core.run_config import SCENARIOS, RunConfig, dump_config, load_config
from app.numerics.eigen import EigenSolver, EtaScan
from app.numerics.energy import ProblemData, SubcriticalParams
from app.numerics.field_dsl import eval_on_grid, parse_expr
from app.numerics.minimize import ConstrainedMinimizer, LandscapeCurve
from app.numerics.solver import (
    ContinuationSchedule,
    SolveReport,
    rescale_problem,
    single_solution_pipeline,
    two_solution_pipeline,
    unscale_report,
)
from app.numerics.thresholds import (
    C2_and_Lambda,
    GateInputs,
    ThresholdReport,
    calibrate_A,
    k0,
    k0_theorem2,
    k1q_k2q,
    nonexistence_check,
    sobolev_K,
    sup_f_lower_bound,
    sup_sign,
    theorem_gate,
)
from app.numerics.torus_field import TorusGrid, lp_norm, sobolev_norm
from app.report.writer import ReportWriter

EXIT_OK: int = 0
EXIT_GATE_FAILED: int = 2
EXIT_NOT_CONVERGED: int = 3
EXIT_CONFIG_ERROR: int = 4

class Orchestrator:
    '''
    # 하나의 시나리오를 실행하고 산출물을 기록한 뒤 종료 코드를 돌려주는 클래스

    Attributes:
        config   (RunConfig)   : 검증된 실행 설정 (--seed 가 반영됨)
        scenario (str)         : 실행할 시나리오 이름
        writer   (ReportWriter): 산출물 기록기
    '''
    def __init__(self, config: RunConfig, scenario: Optional[str] = None, out_dir: Optional[Union[str, Path]] = None, seed: Optional[int] = None) -> None:
        '''
        Args:
            config   (RunConfig)                 : 실행 설정
            scenario (Optional[str])             : 명령줄 시나리오 (설정 파일의 name 보다 우선)
            out_dir  (Optional[Union[str, Path]]): 산출물 디렉토리 (기본 output.directory 또는 data/output/<scenario>)
            seed     (Optional[int])             : 설정의 solver.seed 를 덮어쓸 시드

        Raises:
            ConfigError: 시나리오를 정할 수 없는 경우
        '''
        name = scenario or config.scenario.name
        if name is None:
            raise ConfigError('시나리오가 지정되지 않았습니다 (명령줄 인자 또는 [scenario] name)')
        if name not in SCENARIOS:
            raise ConfigError(f'알 수 없는 시나리오 {name!r} (가능한 값: {", ".join(SCENARIOS)})')

        if seed is not None:
            config = config.model_copy(update={'solver': config.solver.model_copy(update={'seed': seed})})

        self.config = config
        self.scenario = name

        if out_dir is None:
            out_dir = config.output.directory or settings.OUTPUT_PATH / name
        self.writer = ReportWriter(Path(out_dir), config.output.formats)

    @classmethod
    def from_path(cls, config_path: Union[str, Path], scenario: Optional[str] = None, out_dir: Optional[Union[str, Path]] = None, seed: Optional[int] = None) -> 'Orchestrator':
        return cls(load_config(config_path), scenario, out_dir, seed)

    def execute(self) -> int:
        '''
        # 시나리오를 실행하는 함수

        Returns:
            int: 0 성공, 2 가정 판정 실패, 3 수렴 실패

        Raises:
            ConfigError: 설정 값으로 문제를 구성할 수 없는 경우
            Exception  : 시나리오 실행 중 알 수 없는 오류 발생
        '''
        logger.info(f'시나리오 {self.scenario} 를 시작합니다 (산출물: {self.writer.out_dir})')
        self.writer.write_txt('config.ini', dump_config(self.config))

        try:
            code = getattr(self, f'_run_{self.scenario}')()

        except GateFailedError as error:
            logger.error(f'가정 판정을 통과하지 못했습니다: {error}')
            return EXIT_GATE_FAILED
        except ConfigError:
            raise
        except Exception as error:
            logger.critical(f'시나리오 {self.scenario} 실행 중 알 수 없는 오류가 발생했습니다: {error}', exc_info=True)
            raise

        logger.info(f'시나리오 {self.scenario} 를 종료합니다 (종료 코드 {code})')
        return code

    # 문제 구성
    def _problem(self) -> ProblemData:
        manifold, problem = self.config.manifold, self.config.problem
        try:
            grid = TorusGrid(manifold.n, manifold.points_per_axis)
            f = eval_on_grid(parse_expr(problem.f), grid).field
            a = eval_on_grid(parse_expr(problem.a), grid).field
            return ProblemData(n=manifold.n, p=problem.p, h=problem.h, f=f, a=a)
        except (ExprSyntaxError, ExprEvaluationError, GridError, DomainError) as error:
            raise ConfigError(f'[problem] 계수를 구성할 수 없습니다: {error}')

    def _sub(self, prob: ProblemData) -> SubcriticalParams:
        scenario = self.config.scenario
        q = scenario.q if scenario.q is not None else 0.5 * (prob.p_flat + prob.p_star)
        try:
            sub = SubcriticalParams(q=q, eps=scenario.eps)
            sub.check_subcritical(prob)
        except DomainError as error:
            raise ConfigError(f'[scenario] q, eps 가 허용 범위를 벗어났습니다: {error}')
        return sub

    def _base_scale(self, prob: ProblemData, q: float) -> float:
        # k 탐색의 기준 척도 k₀ (f⁻ ≡ 0 이고 ∫f ≥ 0 이면 1)
        if prob.F_minus > 0.0:
            return k0(prob.p, q, prob.h, prob.F_minus)
        if prob.int_f < 0.0:
            return k0_theorem2(prob.p, q, prob.h, prob.int_f)
        return 1.0

    def _k_grid(self, prob: ProblemData, q: float) -> np.ndarray:
        scenario, solver = self.config.scenario, self.config.solver
        base = self._base_scale(prob, q)
        k_min = scenario.k_min if scenario.k_min is not None else solver.k_star_factor * base
        k_max = scenario.k_max if scenario.k_max is not None else solver.k_scan_factor * base
        if not k_min < k_max:
            raise ConfigError(f'k 탐색 구간이 비어 있습니다: [{k_min}, {k_max}]')
        return np.geomspace(k_min, k_max, scenario.k_samples)

    # 판정 입력 계산
    def _eta_scan(self, prob: ProblemData, sub: SubcriticalParams) -> Tuple[EigenSolver, EtaScan]:
        solver = EigenSolver(prob, self.config.solver)
        scan = solver.eta_scan(sub, self.config.scenario.eta_list, self.config.scenario.delta)
        return solver, scan

    def _landscape_estimates(self, prob: ProblemData, sub: SubcriticalParams, eta0: float) -> Tuple[Optional[float], Optional[float]]:
        '''
        # k ≥ k₀ 지형 탐색으로 μ̂ (최대 μ) 와 k_** (k₂ 너머 처음 μ < 0 인 k 의 2배) 를 추정하는 함수
        '''
        if not prob.F_minus > 0.0 or not math.isfinite(eta0):
            return None, None

        solver = self.config.solver
        base = k0(prob.p, sub.q, prob.h, prob.F_minus)
        _, k2 = k1q_k2q(prob.n, prob.p, sub.q, prob.h, eta0, prob.F_minus)
        ks = np.geomspace(base, max(solver.k_scan_factor * base, 4.0 * k2), self.config.scenario.k_samples)

        curve = ConstrainedMinimizer(prob, sub, solver).landscape(ks)
        mu_hat = max(0.0, max(curve.mus))
        beyond = [sample.k for sample in curve.samples if sample.k > k2 and sample.mu < 0.0]
        k_starstar = 2.0 * beyond[0] if beyond else None

        logger.info(f'지형 추정: μ̂={mu_hat:.6g}, k_**={k_starstar}')
        return mu_hat, k_starstar

    def _gate_inputs(self, prob: ProblemData, sub: SubcriticalParams) -> Tuple[GateInputs, EtaScan]:
        solver = self.config.solver
        _, scan = self._eta_scan(prob, sub)

        eta0 = scan.eta0
        if eta0 is None:
            logger.warning('η 목록에서 판정 기준을 만족하는 η₀ 를 찾지 못했습니다.')
            eta0 = math.nan

        K = sobolev_K(prob.n, prob.p)
        A = calibrate_A(prob.grid, prob.p, solver.eps_sob, solver.a_probes)

        mu_hat, k_starstar = None, None
        if sup_sign(prob.sup_f, max(abs(prob.sup_f), abs(prob.inf_f))) > 0:
            mu_hat, k_starstar = self._landscape_estimates(prob, sub, eta0)

        lambda_eta0 = next((sample.value for sample in scan.samples if sample.eta == scan.eta0), None)
        inputs = GateInputs(
            lambda_f=scan.lambda_f,
            eta0=eta0,
            K=K,
            A=A,
            mu_hat=mu_hat,
            k_starstar=k_starstar,
            lambda_eta0=lambda_eta0,
        )
        return inputs, scan

    def _write_gate(self, report: ThresholdReport) -> None:
        self.writer.write_csv('thresholds.csv', ['name', 'value', 'verdict'], report.rows())
        self.writer.write_txt('thresholds.txt', report.render())

    # 시나리오
    def _run_landscape(self) -> int:
        prob = self._problem()
        sub = self._sub(prob)
        ks = self._k_grid(prob, sub.q)

        curve: LandscapeCurve = ConstrainedMinimizer(prob, sub, self.config.solver).landscape(ks)
        rows = [
            (sample.k, sample.mu, sample.converged, sup_f_lower_bound(prob.p, sub.q, prob.h, sample.k, prob.sup_f))
            for sample in curve.samples
        ]

        self.writer.write_csv('landscape.csv', ['k', 'mu', 'converged', 'mu_lower_bound'], rows)
        self.writer.write_svg('landscape.svg', curve.ks, curve.mus, f'mu_(k,q) (q={sub.q:.6g}, eps={sub.eps:.3g})', 'k', 'mu')

        unconverged = [sample.k for sample in curve.samples if not sample.converged]
        if unconverged:
            logger.warning(f'수렴하지 않은 지형 표본이 {len(unconverged)}개 있습니다.')
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def _run_eigen(self) -> int:
        prob = self._problem()
        sub = self._sub(prob)

        solver, scan = self._eta_scan(prob, sub)
        base = solver.lambda_f()

        self.writer.write_csv('eigen.csv', ['eta', 'lambda', 'converged'], [(s.eta, s.value, s.converged) for s in scan.samples])
        self.writer.write_svg('eigen.svg', [s.eta for s in scan.samples], [s.value for s in scan.samples], f'lambda_(f,eta,q) (q={sub.q:.6g})', 'eta', 'lambda')
        self.writer.write_txt('eigen.txt', tabulate(
            [('lambda_f', base.value), ('eta0', scan.eta0 if scan.eta0 is not None else math.nan), ('q', sub.q)],
            headers=['name', 'value'],
            tablefmt='simple',
            floatfmt='.10g',
        ))
        if base.argmin is not None:
            self.writer.write_field('lambda_f_argmin', base.argmin)

        if not base.converged or not all(sample.converged for sample in scan.samples):
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def _run_thresholds(self) -> int:
        prob = self._problem()
        sub = self._sub(prob)

        inputs, _ = self._gate_inputs(prob, sub)
        report = theorem_gate(prob, self.config.scenario.which, inputs, q=sub.q)
        self._write_gate(report)

        if not report.passed:
            logger.warning(f'가정 판정 실패: {"; ".join(report.failures)}')
            return EXIT_GATE_FAILED
        return EXIT_OK

    def _write_solution(self, report: SolveReport, extra: List[Tuple[str, float]]) -> None:
        rows = [(name, value) for name, value in extra + report.metrics()]
        self.writer.write_csv(f'solve_{report.branch}.csv', ['name', 'value'], rows)
        self.writer.write_field(f'u_{report.branch}', report.u)

    def _run_solve(self) -> int:
        prob = self._problem()
        sub = self._sub(prob)
        solver = self.config.solver

        inputs, _ = self._gate_inputs(prob, sub)
        gate = theorem_gate(prob, self.config.scenario.which, inputs, q=sub.q)
        self._write_gate(gate)
        if not gate.passed:
            raise GateFailedError('; '.join(gate.failures), gate)

        if gate.which == 'thm1':
            scaled = rescale_problem(prob, inputs.eta0)
            schedule = ContinuationSchedule.default(scaled.problem, solver)
            pair = two_solution_pipeline(scaled.problem, schedule, solver, inputs.eta0)

            first, second = (unscale_report(report, prob, scaled.c, solver.delta_reg) for report in pair)
            distance = lp_norm(first.u - second.u, first.q)
            reports = [replace(first, distinctness=distance), replace(second, distinctness=distance)]
            extra = [('c', scaled.c), ('c_literal', scaled.c_literal), ('eta0', inputs.eta0)]
        else:
            schedule = ContinuationSchedule.default(prob, solver)
            reports = [single_solution_pipeline(prob, schedule, solver)]
            extra = []

        for report in reports:
            self._write_solution(report, extra)

        self.writer.write_txt('solve.txt', tabulate(
            [(r.branch, r.critical_energy, r.weak_residual, r.min_u, r.k_attained, r.converged) for r in reports],
            headers=['branch', 'critical_energy', 'weak_residual', 'min_u', 'k_attained', 'converged'],
            tablefmt='simple',
            floatfmt='.10g',
        ))

        failed = [r.branch for r in reports if not r.converged or not r.weak_residual <= solver.tol_residual]
        if failed:
            logger.warning(f'수렴하지 않았거나 잔차가 허용 오차를 넘은 가지: {failed}')
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    def _run_nonexist(self) -> int:
        prob = self._problem()
        scenario, solver = self.config.scenario, self.config.solver

        K = sobolev_K(prob.n, prob.p)
        A = calibrate_A(prob.grid, prob.p, solver.eps_sob, solver.a_probes)

        Lambda = scenario.Lambda
        if Lambda is None:
            sub = self._sub(prob)
            _, scan = self._eta_scan(prob, sub)
            eta0 = scan.eta0 if scan.eta0 is not None else math.nan
            mu_hat, k_starstar = self._landscape_estimates(prob, sub, eta0)
            if mu_hat is None or k_starstar is None:
                raise ConfigError('[scenario] Lambda 를 지정하거나 μ̂, k_** 를 추정할 수 있는 문제여야 합니다')
            Lambda = C2_and_Lambda(prob.n, prob.p, prob.h, K, A, mu_hat, k_starstar, prob.sup_f).Lambda

        verdict = nonexistence_check(prob.n, prob.p, K, A, Lambda, prob.a, prob.f)
        rows: List[Tuple[str, float]] = [
            ('K', K),
            ('A', A),
            ('Lambda', Lambda),
            ('L', verdict.L),
            ('R', verdict.R),
            ('nonexistent', 1.0 if verdict.nonexistent else 0.0),
        ]

        if scenario.probe_solve:
            rows.extend(self._probe_solve(prob, Lambda))

        self.writer.write_csv('nonexist.csv', ['name', 'value'], rows)
        self.writer.write_txt('nonexist.txt', f'verdict: {verdict.verdict}\n' + tabulate(rows, headers=['name', 'value'], tablefmt='simple', floatfmt='.10g'))
        return EXIT_OK

    def _probe_solve(self, prob: ProblemData, Lambda: float) -> List[Tuple[str, float]]:
        # 임계 범함수의 띠 최소화를 한 번 실행하고 결과만 기록한다 (종료 코드에 영향 없음)
        solver = self.config.solver
        critical = SubcriticalParams.critical(prob)
        base = self._base_scale(prob, critical.q)

        result = ConstrainedMinimizer(prob, critical, solver).minimize_on_band(solver.k_star_factor * base, solver.k_scan_factor * base)
        norm = sobolev_norm(result.minimizer, prob.p, solver.delta_reg)
        logger.info(f'비존재 탐침: 수렴 {result.converged}, ‖u‖={norm:.6g}, Λ={Lambda:.6g}')
        return [
            ('probe_converged', 1.0 if result.converged else 0.0),
            ('probe_energy', result.mu),
            ('probe_norm', norm),
            ('probe_norm_below_Lambda', 1.0 if norm <= Lambda else 0.0),
        ]

    def _run_continuity(self) -> int:
        prob = self._problem()
        sub = self._sub(prob)
        scenario = self.config.scenario

        k = scenario.k if scenario.k is not None else self._base_scale(prob, sub.q)
        probe = ConstrainedMinimizer(prob, sub, self.config.solver).probe_continuity(k, scenario.rel_step)

        self.writer.write_csv(
            'continuity.csv',
            ['k', 'rel_step', 'mu', 'jump', 'converged'],
            [(k, scenario.rel_step, probe.mu, probe.jump, probe.converged)],
        )
        return EXIT_OK if probe.converged else EXIT_NOT_CONVERGED

def run_scenario(config: RunConfig, scenario: Optional[str] = None, out_dir: Optional[Union[str, Path]] = None, seed: Optional[int] = None) -> int:
    '''
    # 설정 하나로 시나리오를 실행하고 종료 코드를 돌려주는 함수 (설정 오류는 4)
    '''
    try:
        return Orchestrator(config, scenario, out_dir, seed).execute()
    except ConfigError as error:
        logger.error(f'설정 오류: {error}')
        return EXIT_CONFIG_ERROR

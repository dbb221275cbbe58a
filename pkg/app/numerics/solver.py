'''
# 준임계 연속법 (ε → 0, q → p*) 으로 두 해 (음의 에너지 최소점, 산길 해) 와 단일 해를 구하는 파이프라인
'''
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect
from tqdm import tqdm

from app.core.config import settings
from app.core.exceptions import DomainError, SingularTermError
from app.core.logger import logger
from app.core.run_config import SolverConfig
from app.numerics.energy import ProblemData, SubcriticalFunctional, SubcriticalParams, critical_energy, first_variation
from app.numerics.minimize import ConstrainedMinimizer, MinimizeResult
from app.numerics.thresholds import (
    condition_1_3_rhs,
    k0,
    k0_theorem2,
    k1q_k2q,
    l_limit,
    lemma22_lower_bound,
    phi_q,
)
from app.numerics.torus_field import ScalarField, integrate, lp_norm, sobolev_norm

@dataclass(frozen=True)
class ContinuationStage:
    eps: float
    q: float

    @property
    def critical(self) -> bool:
        return self.eps == 0.0

@dataclass(frozen=True)
class ContinuationSchedule:
    '''
    # (ε_j, q_j) 단계 목록과 마지막 임계 단계 (ε = 0, q = p*)

    Attributes:
        stages (Tuple[ContinuationStage, ...]): ε 는 순감소, q 는 순증가하는 준임계 단계
        final  (Optional[ContinuationStage])  : 마지막 임계 단계 (없으면 준임계 단계에서 끝남)
    '''
    stages: Tuple[ContinuationStage, ...]
    final: Optional[ContinuationStage] = None

    def __post_init__(self) -> None:
        for previous, current in zip(self.stages, self.stages[1:]):
            if not current.eps < previous.eps:
                raise DomainError('연속법의 ε 는 순감소해야 합니다.')
            if not current.q > previous.q:
                raise DomainError('연속법의 q 는 순증가해야 합니다.')
        if any(stage.eps <= 0.0 for stage in self.stages):
            raise DomainError('준임계 단계의 ε 는 양수여야 합니다.')
        if self.final is not None and self.final.eps != 0.0:
            raise DomainError('마지막 임계 단계의 ε 는 0 이어야 합니다.')

    @property
    def eps_sequence(self) -> List[float]:
        return [stage.eps for stage in self.stages]

    @property
    def q_sequence(self) -> List[float]:
        return [stage.q for stage in self.stages]

    @property
    def all_stages(self) -> Tuple[ContinuationStage, ...]:
        return self.stages + ((self.final,) if self.final is not None else ())

    @classmethod
    def default(cls, prob: ProblemData, cfg: SolverConfig) -> 'ContinuationSchedule':
        '''
        # ε_j = ε₀·2^{-j}, q_j = p* - (p* - q_start)·2^{-j} 와 마지막 임계 단계로 구성된 기본 일정

        Args:
            prob (ProblemData) : 문제 데이터 (p*, p♭ 제공)
            cfg  (SolverConfig): stages, eps0, q_start 설정

        Returns:
            ContinuationSchedule: 기본 연속법 일정
        '''
        q_start = cfg.q_start if cfg.q_start is not None else 0.5 * (prob.p_flat + prob.p_star)
        if not prob.p_flat < q_start < prob.p_star:
            raise DomainError(f'q_start 는 (p♭, p*) = ({prob.p_flat}, {prob.p_star}) 안에 있어야 합니다: {q_start}')

        stages = tuple(
            ContinuationStage(eps=cfg.eps0 * 2.0 ** -j, q=prob.p_star - (prob.p_star - q_start) * 2.0 ** -j)
            for j in range(cfg.stages)
        )
        return cls(stages=stages, final=ContinuationStage(eps=0.0, q=prob.p_star))

@dataclass(frozen=True)
class SolveReport:
    '''
    # 하나의 해 가지에 대한 보고서

    Attributes:
        branch          (str)                 : 'negative_energy', 'mountain_pass', 'single'
        u               (ScalarField)         : 해 필드
        q               (float)               : 마지막으로 푼 단계의 q
        eps             (float)               : 마지막으로 푼 단계의 ε
        energy_at_stage (Tuple[float, ...])   : 단계별 에너지
        critical_energy (float)               : q = p*, ε = 0 에서의 에너지
        k_attained      (float)               : ∫|u|^q
        weak_residual   (float)               : 약형 잔차
        min_u           (float)               : u 의 최솟값
        lemma22_bound   (Optional[float])     : 최솟값 하한 (inf f ≥ 0 이면 None)
        distinctness    (Optional[float])     : 다른 가지와의 L^q 거리
        converged       (bool)                : 수렴 여부
        skipped_stages  (Tuple[int, ...])     : 건너뛴 단계 번호
        flags           (Tuple[str, ...])     : 'degenerate', 'collapse' 등 진단 표시
        level_bound     (Optional[float])     : 산길 해의 하한 μ_{k*,q}
    '''
    branch: str
    u: ScalarField = field(repr=False)
    q: float
    eps: float
    energy_at_stage: Tuple[float, ...]
    critical_energy: float
    k_attained: float
    weak_residual: float
    min_u: float
    lemma22_bound: Optional[float]
    distinctness: Optional[float] = None
    converged: bool = False
    skipped_stages: Tuple[int, ...] = ()
    flags: Tuple[str, ...] = ()
    level_bound: Optional[float] = None

    def metrics(self) -> List[Tuple[str, float]]:
        rows = [
            ('q', self.q),
            ('eps', self.eps),
            ('critical_energy', self.critical_energy),
            ('k_attained', self.k_attained),
            ('weak_residual', self.weak_residual),
            ('min_u', self.min_u),
            ('converged', 1.0 if self.converged else 0.0),
        ]
        if self.lemma22_bound is not None:
            rows.append(('lemma22_bound', self.lemma22_bound))
        if self.distinctness is not None:
            rows.append(('distinctness', self.distinctness))
        if self.level_bound is not None:
            rows.append(('level_bound', self.level_bound))
        rows.extend((f'energy_stage_{index}', value) for index, value in enumerate(self.energy_at_stage))
        return rows

@dataclass(frozen=True)
class PathState:
    '''
    # u_A 에서 u_B 로 가는 이산 경로

    Attributes:
        nodes      (Tuple[ScalarField, ...]): 양 끝이 고정된 노드 목록
        max_index  (int)                    : 에너지가 가장 큰 노드 번호
        max_energy (float)                  : 최대 에너지
    '''
    nodes: Tuple[ScalarField, ...]
    max_index: int
    max_energy: float

@dataclass(frozen=True)
class RescaleResult:
    '''
    # 변수 변환 ũ = u/c 로 얻은 문제

    Attributes:
        problem   (ProblemData): f̃ = c^{p*-p}f, ã = a/c^{p*+p} 인 문제
        c         (float)      : c^{p*-p} = p*|h|/(η₀∫|f⁻|) 를 만족하는 c
        c_literal (float)      : 지수 1/(2(p*-p)) 를 그대로 읽은 값
    '''
    problem: ProblemData
    c: float
    c_literal: float

@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    gap: float
    contradiction: bool

@dataclass(frozen=True)
class ZeroLevel:
    k: float
    result: MinimizeResult
    bracketed: bool

def rescale_problem(prob: ProblemData, eta0: float) -> RescaleResult:
    '''
    # |h| = (η₀/p*)∫|f̃⁻| 가 등호로 성립하도록 계수를 바꾸는 함수

    Raises:
        DomainError: η₀ ≤ 0 또는 f⁻ ≡ 0
    '''
    if not eta0 > 0.0:
        raise DomainError(f'η₀ 는 양수여야 합니다: {eta0}')
    F = prob.F_minus
    if not F > 0.0:
        raise DomainError('f⁻ ≡ 0 이면 변수 변환을 정의할 수 없습니다.')

    gap = prob.p_star - prob.p
    base = prob.p_star * abs(prob.h) / (eta0 * F)
    c = base ** (1.0 / gap)

    scaled = prob.with_coefficients(
        f=ScalarField(prob.grid, base * prob.f.values),
        a=ScalarField(prob.grid, prob.a.values / c ** (prob.p_star + prob.p)),
    )
    return RescaleResult(problem=scaled, c=c, c_literal=base ** (1.0 / (2.0 * gap)))

def weak_residual(u: ScalarField, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> float:
    '''
    # ‖first_variation(u)‖₂ / (1 + ‖u‖^{p-1}) (특이항이 발산하면 math.inf)
    '''
    try:
        gradient = first_variation(u, prob, sub, delta_reg)
    except SingularTermError:
        return math.inf

    l2 = math.sqrt(integrate(ScalarField(u.grid, gradient.values ** 2)))
    return l2 / (1.0 + sobolev_norm(u, prob.p, delta_reg) ** (prob.p - 1.0))

def integral_identity_check(u: ScalarField, prob: ProblemData) -> IdentityCheck:
    '''
    # 방정식을 적분한 항등식 ∫h u^{p-1} = ∫f u^{p*-1} + ∫a u^{-p*-1} 의 차이를 계산하는 함수

    f ≥ 0 이면 좌변 < 0 ≤ 우변 이므로 양의 해가 존재할 수 없다 (contradiction).

    Raises:
        DomainError: u 가 양수가 아닌 경우
    '''
    if not np.all(u.values > 0.0):
        raise DomainError('적분 항등식은 양의 필드에서만 계산합니다.')

    p, p_star = prob.p, prob.p_star
    lhs = integrate(ScalarField(u.grid, prob.h * u.values ** (p - 1.0)))
    rhs = integrate(ScalarField(u.grid, prob.f.values * u.values ** (p_star - 1.0) + prob.a.values * u.values ** (-p_star - 1.0)))

    scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
    contradiction = bool(np.all(prob.f.values >= 0.0)) and lhs < 0.0 <= rhs
    return IdentityCheck(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs) / scale, contradiction=contradiction)

def find_zero_level(minimizer: ConstrainedMinimizer, k_lo: float, k_hi: float, init: Optional[ScalarField] = None) -> ZeroLevel:
    '''
    # μ(k) = 0 인 k 를 (k_lo, k_hi) 에서 이분법으로 찾는 함수

    부호가 바뀌지 않으면 μ 가 더 작은 끝점을 bracketed=False 로 반환한다.

    Args:
        minimizer (ConstrainedMinimizer) : 고정된 (q, ε) 의 구면 최소화기
        k_lo      (float)                : 구간 하한
        k_hi      (float)                : 구간 상한
        init      (Optional[ScalarField]): 첫 최소화의 초기값

    Returns:
        ZeroLevel: k, 그 k 에서의 최소화 결과, 부호 변화 여부
    '''
    results: Dict[float, MinimizeResult] = {}
    warm = [init]

    def level(k: float) -> float:
        result = minimizer.minimize_on_sphere(k, warm[0])
        warm[0] = result.minimizer
        results[k] = result
        return result.mu

    mu_lo, mu_hi = level(k_lo), level(k_hi)

    if mu_lo == 0.0:
        return ZeroLevel(k=k_lo, result=results[k_lo], bracketed=True)
    if mu_lo * mu_hi > 0.0:
        k = k_lo if mu_lo <= mu_hi else k_hi
        logger.warning(f'μ(k) = 0 구간을 찾지 못했습니다 (μ({k_lo:.6g})={mu_lo:.3e}, μ({k_hi:.6g})={mu_hi:.3e}). 끝점 k={k:.6g} 를 사용합니다.')
        return ZeroLevel(k=k, result=results[k], bracketed=False)

    k = bisect(level, k_lo, k_hi, xtol=1e-10 * k_hi, rtol=1e-10, maxiter=60)
    if k not in results:
        level(k)
    return ZeroLevel(k=k, result=results[k], bracketed=True)

class MountainPass:
    '''
    # 양 끝이 고정된 이산 경로의 최대 에너지 노드를 안장점으로 끌어올리는 클래스

    최대 노드는 경로 접선 방향으로 오르고 수직 방향으로 내려가며, 나머지 노드는
    수직 방향으로만 내려간다. 매 반복마다 최대 노드의 양쪽 구간을 L² 호 길이로 다시 배치한다.

    Attributes:
        prob (ProblemData)      : 문제 데이터
        sub  (SubcriticalParams): 준임계 매개변수
        cfg  (SolverConfig)     : path_nodes, mp_max_iters, mp_step, tol_grad
    '''
    def __init__(self, prob: ProblemData, sub: SubcriticalParams, cfg: SolverConfig) -> None:
        self.prob = prob
        self.sub = sub
        self.cfg = cfg
        self.functional = SubcriticalFunctional(prob, sub, cfg.delta_reg)
        self._weight = prob.grid.cell_weight

    def _norm(self, values: np.ndarray) -> float:
        return math.sqrt(self._weight * float(np.sum(values * values)))

    def _lq_power(self, values: np.ndarray) -> float:
        return self._weight * float(np.sum(np.abs(values) ** self.sub.q))

    def _segment(self, start: np.ndarray, end: np.ndarray, count: int) -> List[np.ndarray]:
        # 선형 보간 후 |·| 를 취하고 L^q 값을 양 끝 사이에서 선형으로 맞춘다
        k_start, k_end = self._lq_power(start), self._lq_power(end)
        nodes = []
        for t in np.linspace(0.0, 1.0, count):
            node = np.abs((1.0 - t) * start + t * end)
            current = self._lq_power(node)
            target = (1.0 - t) * k_start + t * k_end
            if current > 0.0 and 0.0 < t < 1.0:
                node = node * (target / current) ** (1.0 / self.sub.q)
            nodes.append(node)
        return nodes

    def initial_path(self, u_A: np.ndarray, u_B: np.ndarray, via: Optional[np.ndarray] = None) -> List[np.ndarray]:
        count = self.cfg.path_nodes
        if via is None:
            return self._segment(u_A, u_B, count)

        middle = count // 2
        return self._segment(u_A, via, middle + 1) + self._segment(via, u_B, count - middle)[1:]

    def _respace_segment(self, segment: List[np.ndarray]) -> List[np.ndarray]:
        if len(segment) <= 2:
            return segment

        lengths = [self._norm(right - left) for left, right in zip(segment, segment[1:])]
        cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
        total = cumulative[-1]
        if total <= 0.0:
            return segment

        respaced = [segment[0]]
        for target in np.linspace(0.0, total, len(segment))[1:-1]:
            index = min(int(np.searchsorted(cumulative, target, side='right')) - 1, len(segment) - 2)
            span = cumulative[index + 1] - cumulative[index]
            t = (target - cumulative[index]) / span if span > 0.0 else 0.0
            respaced.append((1.0 - t) * segment[index] + t * segment[index + 1])
        respaced.append(segment[-1])
        return respaced

    def _respace(self, nodes: List[np.ndarray], pivot: int) -> List[np.ndarray]:
        left = self._respace_segment(nodes[:pivot + 1])
        right = self._respace_segment(nodes[pivot:])
        return left + right[1:]

    def _energies(self, nodes: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([self.functional.value(node) for node in nodes])

    def _gradient_norm(self, values: np.ndarray) -> float:
        try:
            return self._norm(self.functional.gradient(values))
        except SingularTermError:
            return math.inf

    def run(self, u_A: ScalarField, u_B: ScalarField, via: Optional[ScalarField] = None) -> Tuple[PathState, bool, Tuple[str, ...]]:
        '''
        # 경로를 변형하여 산길 안장점을 찾는 함수

        Returns:
            Tuple[PathState, bool, Tuple[str, ...]]: 마지막 경로, 수렴 여부, 진단 표시
        '''
        if np.array_equal(u_A.values, u_B.values):
            logger.warning('산길 경로의 양 끝이 같아 경로 길이가 0 입니다 (degenerate).')
            energy = self.functional.value(u_A.values)
            return PathState(nodes=(u_A,), max_index=0, max_energy=energy), False, ('degenerate',)

        nodes = self.initial_path(u_A.values, u_B.values, via.values if via is not None else None)
        energies = self._energies(nodes)
        last = len(nodes) - 1
        step = self.cfg.mp_step
        converged = False
        flags: List[str] = []

        for _ in tqdm(range(self.cfg.mp_max_iters), desc=f'Mountain pass q={self.sub.q:.4g}', leave=False):
            top = int(np.argmax(energies))
            if top in (0, last):
                logger.warning('최대 에너지 노드가 경로 끝점에 도달했습니다 (collapse). path_nodes 를 늘려 보세요.')
                flags.append('collapse')
                break

            gradients = {index: self.functional.gradient(nodes[index]) for index in range(1, last)}
            top_norm = self._norm(gradients[top])
            if top_norm <= self.cfg.tol_grad:
                converged = True
                break

            trial = list(nodes)
            for index in range(1, last):
                tangent = nodes[index + 1] - nodes[index - 1]
                length = self._norm(tangent)
                tangent = tangent / length if length > 0.0 else tangent
                along = self._weight * float(np.sum(gradients[index] * tangent))

                if index == top:
                    direction = gradients[index] - 2.0 * along * tangent
                else:
                    direction = gradients[index] - along * tangent
                trial[index] = np.abs(nodes[index] - step * direction)

            trial = self._respace(trial, top)
            trial_energies = self._energies(trial)
            trial_top = int(np.argmax(trial_energies))

            if not np.all(np.isfinite(trial_energies)) or self._gradient_norm(trial[trial_top]) > 2.0 * top_norm:
                step *= 0.5
                if step < 1e-16:
                    flags.append('stalled')
                    break
                continue

            nodes, energies = trial, trial_energies
            step *= 1.1

        top = int(np.argmax(energies))
        state = PathState(
            nodes=tuple(ScalarField(self.prob.grid, node) for node in nodes),
            max_index=top,
            max_energy=float(energies[top]),
        )
        if not converged and not flags:
            logger.warning(f'산길 알고리즘이 {self.cfg.mp_max_iters}회 안에 수렴하지 않았습니다.')
        return state, converged, tuple(flags)

def _lemma22_bound(prob: ProblemData) -> Optional[float]:
    if prob.inf_f < 0.0:
        return lemma22_lower_bound(prob.p, prob.p_flat, prob.h, prob.inf_f)
    return None

def build_report(
    branch: str,
    u: ScalarField,
    prob: ProblemData,
    sub: SubcriticalParams,
    energies: Sequence[float],
    converged: bool,
    skipped: Sequence[int] = (),
    flags: Sequence[str] = (),
    level_bound: Optional[float] = None,
    delta_reg: Optional[float] = None,
) -> SolveReport:
    '''
    # 해 필드로부터 임계 에너지, 약형 잔차 등 보고서 항목을 계산하는 함수
    '''
    return SolveReport(
        branch=branch,
        u=u,
        q=sub.q,
        eps=sub.eps,
        energy_at_stage=tuple(float(value) for value in energies),
        critical_energy=critical_energy(u, prob, delta_reg),
        k_attained=integrate(ScalarField(u.grid, np.abs(u.values) ** sub.q)),
        weak_residual=weak_residual(u, prob, sub, delta_reg),
        min_u=float(np.min(u.values)),
        lemma22_bound=_lemma22_bound(prob),
        converged=converged,
        skipped_stages=tuple(skipped),
        flags=tuple(flags),
        level_bound=level_bound,
    )

def unscale_report(report: SolveReport, prob: ProblemData, c: float, delta_reg: Optional[float] = None) -> SolveReport:
    '''
    # 변환된 문제의 해 ũ 를 u = c·ũ 로 되돌려 원래 문제에서 보고서를 다시 계산하는 함수
    '''
    sub = SubcriticalParams(q=report.q, eps=report.eps)
    restored = build_report(
        report.branch,
        ScalarField(prob.grid, c * report.u.values),
        prob,
        sub,
        report.energy_at_stage,
        report.converged,
        report.skipped_stages,
        report.flags,
        report.level_bound,
        delta_reg,
    )
    return replace(restored, distinctness=report.distinctness)

def mountain_pass(
    prob: ProblemData,
    sub: SubcriticalParams,
    u_A: ScalarField,
    u_B: ScalarField,
    cfg: SolverConfig,
    via: Optional[ScalarField] = None,
    level_bound: Optional[float] = None,
) -> SolveReport:
    '''
    # u_A 와 u_B 를 잇는 경로 중 최대 에너지가 가장 낮은 경로의 안장점을 찾는 함수

    Args:
        prob        (ProblemData)          : 문제 데이터
        sub         (SubcriticalParams)    : 준임계 매개변수
        u_A         (ScalarField)          : 에너지 ≤ 0 인 한쪽 끝
        u_B         (ScalarField)          : 에너지 ≤ 0 인 다른 쪽 끝
        cfg         (SolverConfig)         : 경로 설정
        via         (Optional[ScalarField]): 초기 경로가 지나갈 필드 (이전 단계의 안장점)
        level_bound (Optional[float])      : 보고서에 기록할 μ_{k*,q}

    Returns:
        SolveReport: branch='mountain_pass' 인 보고서
    '''
    state, converged, flags = MountainPass(prob, sub, cfg).run(u_A, u_B, via)
    saddle = state.nodes[state.max_index]
    return build_report(
        'mountain_pass',
        saddle,
        prob,
        sub,
        [state.max_energy],
        converged,
        flags=flags,
        level_bound=level_bound,
        delta_reg=cfg.delta_reg,
    )

class ContinuationSolver:
    '''
    # 연속법 일정을 따라 해 가지를 구하는 클래스

    Attributes:
        prob     (ProblemData)          : 문제 데이터
        schedule (ContinuationSchedule) : (ε, q) 일정
        cfg      (SolverConfig)         : 최소화 설정
        eta0     (float)                : η₀
        init     (Optional[ScalarField]): 첫 단계의 초기값
    '''
    def __init__(
        self,
        prob: ProblemData,
        schedule: ContinuationSchedule,
        cfg: SolverConfig,
        eta0: float = 1.0,
        init: Optional[ScalarField] = None,
    ) -> None:
        self.prob = prob
        self.schedule = schedule
        self.cfg = cfg
        self.eta0 = eta0
        self.init = init

        for stage in schedule.all_stages:
            SubcriticalParams(stage.q, stage.eps).check_subcritical(prob)

    def _admissible(self, stage: ContinuationStage) -> bool:
        # μ_{k₀,q} ≤ 0 을 보장하는 ∫a 상한 검사
        prob = self.prob
        if stage.critical:
            bound = condition_1_3_rhs(prob.n, prob.p, prob.h, prob.F_minus)
            return prob.int_a < bound
        return prob.int_a <= phi_q(prob.p, stage.q, prob.h, prob.F_minus)

    def _scales(self, stage: ContinuationStage) -> Tuple[float, float, float]:
        # (k₀, k_{1,q}, k_{2,q}), 임계 단계에서는 q → p* 극한 l, 2^{n/p}·l
        prob = self.prob
        base = k0(prob.p, stage.q, prob.h, prob.F_minus)
        if stage.critical:
            limit = l_limit(prob.n, prob.p, prob.h, self.eta0, prob.F_minus)
            return base, limit, 2.0 ** (prob.n / prob.p) * limit
        k1, k2 = k1q_k2q(prob.n, prob.p, stage.q, prob.h, self.eta0, prob.F_minus)
        return base, k1, k2

    def _run_stages(self, label: str, solve: Callable[[int, ContinuationStage, SubcriticalParams], Optional[float]], check: bool) -> Tuple[List[float], List[int], Optional[SubcriticalParams]]:
        energies: List[float] = []
        skipped: List[int] = []
        last_sub: Optional[SubcriticalParams] = None

        for index, stage in enumerate(tqdm(self.schedule.all_stages, desc=label)):
            if check and not self._admissible(stage):
                logger.warning(f'{label}: 단계 {index} (ε={stage.eps:.3g}, q={stage.q:.6g}) 에서 ∫a 상한 조건을 만족하지 않아 건너뜁니다.')
                skipped.append(index)
                continue

            sub = SubcriticalParams(q=stage.q, eps=stage.eps)
            try:
                energy = solve(index, stage, sub)
            except Exception as error:
                logger.critical(f'{label}: 단계 {index} 계산 중 오류가 발생했습니다: {error}')
                raise

            if energy is not None:
                energies.append(energy)
            last_sub = sub
            logger.info(f'{label}: 단계 {index} 완료 (ε={stage.eps:.3g}, q={stage.q:.6g}, 에너지 {energy})')

        return energies, skipped, last_sub

    def negative_energy_branch(self) -> SolveReport:
        '''
        # 띠 [k_*, k_{1,q}] 위의 최소화로 음의 에너지 해를 구하는 함수
        '''
        state: Dict[str, Optional[MinimizeResult]] = {'result': None}
        warm = [self.init]

        def solve(index: int, stage: ContinuationStage, sub: SubcriticalParams) -> float:
            base, k1, _ = self._scales(stage)
            result = ConstrainedMinimizer(self.prob, sub, self.cfg).minimize_on_band(self.cfg.k_star_factor * base, k1, warm[0])
            warm[0] = result.minimizer
            state['result'] = result
            return result.mu

        energies, skipped, sub = self._run_stages('Branch negative_energy', solve, check=True)
        result = state['result']
        if result is None or sub is None:
            raise DomainError('모든 연속법 단계가 건너뛰어졌습니다.')

        return build_report('negative_energy', result.minimizer, self.prob, sub, energies, result.converged, skipped, delta_reg=self.cfg.delta_reg)

    def mountain_pass_branch(self) -> SolveReport:
        '''
        # μ = 0 고정점 두 개 사이의 산길 알고리즘으로 양의 에너지 해를 구하는 함수
        '''
        state: Dict[str, Optional[SolveReport]] = {'report': None}
        anchors: List[Optional[ScalarField]] = [self.init, None]

        def solve(index: int, stage: ContinuationStage, sub: SubcriticalParams) -> float:
            base, k1, k2 = self._scales(stage)
            k_far = max(self.cfg.k_scan_factor * base, 4.0 * k2)
            minimizer = ConstrainedMinimizer(self.prob, sub, self.cfg)

            curve = minimizer.landscape(np.linspace(k1, k2, self.cfg.anchor_samples), anchors[0], progress=False)
            star = max(curve.samples, key=lambda sample: sample.mu)

            lower = find_zero_level(minimizer, base, k1, anchors[0])
            upper = find_zero_level(minimizer, k2, k_far, anchors[1])
            anchors[0], anchors[1] = lower.result.minimizer, upper.result.minimizer

            previous = state['report']
            report = mountain_pass(
                self.prob,
                sub,
                lower.result.minimizer,
                upper.result.minimizer,
                self.cfg,
                via=previous.u if previous is not None else None,
                level_bound=star.mu,
            )
            state['report'] = report
            return report.energy_at_stage[0]

        energies, skipped, sub = self._run_stages('Branch mountain_pass', solve, check=True)
        report = state['report']
        if report is None or sub is None:
            raise DomainError('모든 연속법 단계가 건너뛰어졌습니다.')

        return replace(report, energy_at_stage=tuple(energies), skipped_stages=tuple(skipped))

    def single_branch(self) -> SolveReport:
        '''
        # f ≤ 0 인 경우 띠 [k_*, k_**] 위의 최소화로 해를 구하는 함수
        '''
        state: Dict[str, Optional[MinimizeResult]] = {'result': None}
        warm = [self.init]

        def solve(index: int, stage: ContinuationStage, sub: SubcriticalParams) -> float:
            base = k0_theorem2(self.prob.p, stage.q, self.prob.h, self.prob.int_f)
            result = ConstrainedMinimizer(self.prob, sub, self.cfg).minimize_on_band(
                self.cfg.k_star_factor * base,
                self.cfg.k_scan_factor * base,
                warm[0],
            )
            warm[0] = result.minimizer
            state['result'] = result
            return result.mu

        energies, skipped, sub = self._run_stages('Branch single', solve, check=False)
        result = state['result']
        if result is None or sub is None:
            raise DomainError('모든 연속법 단계가 건너뛰어졌습니다.')

        return build_report('single', result.minimizer, self.prob, sub, energies, result.converged, skipped, delta_reg=self.cfg.delta_reg)

def two_solution_pipeline(
    prob: ProblemData,
    schedule: ContinuationSchedule,
    cfg: SolverConfig,
    eta0: float = 1.0,
    init: Optional[ScalarField] = None,
) -> Tuple[SolveReport, SolveReport]:
    '''
    # 음의 에너지 해와 산길 해를 동시에 구하는 함수

    Args:
        prob     (ProblemData)          : 가정 판정을 통과한 문제
        schedule (ContinuationSchedule) : (ε, q) 일정
        cfg      (SolverConfig)         : 최소화 설정
        eta0     (float)                : η₀
        init     (Optional[ScalarField]): 첫 단계의 초기값

    Returns:
        Tuple[SolveReport, SolveReport]: (negative_energy, mountain_pass), distinctness 포함
    '''
    solver = ContinuationSolver(prob, schedule, cfg, eta0, init)

    with ThreadPoolExecutor(max_workers=min(2, settings.THREADS)) as executor:
        first, second = executor.map(lambda branch: branch(), [solver.negative_energy_branch, solver.mountain_pass_branch])

    distance = lp_norm(first.u - second.u, first.q)
    if first.converged and second.converged and distance < cfg.distinct_tol:
        logger.warning(f'두 해의 L^q 거리가 {distance:.3e} 로 distinct_tol 보다 작습니다.')

    return replace(first, distinctness=distance), replace(second, distinctness=distance)

def single_solution_pipeline(
    prob: ProblemData,
    schedule: ContinuationSchedule,
    cfg: SolverConfig,
    init: Optional[ScalarField] = None,
) -> SolveReport:
    '''
    # f ≤ 0 인 경우의 단일 해 파이프라인

    Raises:
        DomainError: ∫f ≥ 0 이거나 일정이 준임계 범위를 벗어난 경우
    '''
    if not prob.int_f < 0.0:
        raise DomainError(f'단일 해 파이프라인은 ∫f < 0 이 필요합니다: {prob.int_f}')
    return ContinuationSolver(prob, schedule, cfg, init=init).single_branch()

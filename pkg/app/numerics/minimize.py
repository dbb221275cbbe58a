'''
# 구면 B_{k,q} 와 띠 D_{k,q} 위의 제약 최소화, 에너지 지형 μ_{k,q}^ε
'''
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from app.core.exceptions import DomainError
from app.core.logger import logger
from app.core.run_config import SolverConfig
from app.numerics.energy import ProblemData, SubcriticalFunctional, SubcriticalParams
from app.numerics.torus_field import ScalarField, smooth_random_field

BOUND_TOLERANCE: float = 1e-12

Objective = Callable[[np.ndarray], float]
TangentGradient = Callable[[np.ndarray], np.ndarray]
Retraction = Callable[[np.ndarray], np.ndarray]

@dataclass
class DescentOutcome:
    '''
    # 투영 하강 엔진의 결과

    Attributes:
        values     (np.ndarray): 마지막으로 채택된 반복점
        objective  (float)     : 목적 함수 값
        grad_norm  (float)     : 접선 기울기의 L² 노름
        iterations (int)       : 채택된 반복 수
        converged  (bool)      : 허용 오차 충족 여부
    '''
    values: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    converged: bool

def projected_descent(
    objective: Objective,
    tangent_gradient: TangentGradient,
    retract: Retraction,
    start: np.ndarray,
    weight: float,
    cfg: SolverConfig,
    max_iters: Optional[int] = None,
    tol_grad: Optional[float] = None,
) -> DescentOutcome:
    '''
    # Barzilai-Borwein 시험 보폭과 Armijo 역추적을 사용하는 투영 기울기 하강 함수

    반복점은 항상 retract 를 거쳐 제약 집합으로 돌아오며, 채택된 반복에서
    목적 함수 값은 증가하지 않는다.

    Args:
        objective        (Objective)      : 목적 함수 (발산 시 math.inf)
        tangent_gradient (TangentGradient): 제약 집합에 투영된 L² 기울기
        retract          (Retraction)     : 제약 집합으로 되돌리는 사상
        start            (np.ndarray)     : 시작점 (retract 된 상태)
        weight           (float)          : 내적의 셀 가중치
        cfg              (SolverConfig)   : 허용 오차와 보폭 설정
        max_iters        (Optional[int])  : 최대 반복 수 (기본 cfg.max_iters)
        tol_grad         (Optional[float]): 기울기 허용 오차 (기본 cfg.tol_grad)

    Returns:
        DescentOutcome: 마지막 반복점과 수렴 여부
    '''
    max_iters = cfg.max_iters if max_iters is None else max_iters
    tol_grad = cfg.tol_grad if tol_grad is None else tol_grad

    x = start
    fx = objective(x)
    if not math.isfinite(fx):
        logger.warning('시작점의 에너지가 유한하지 않아 하강을 수행하지 않습니다.')
        return DescentOutcome(values=x, objective=fx, grad_norm=math.inf, iterations=0, converged=False)

    g = tangent_gradient(x)
    grad_norm = math.sqrt(weight * float(np.sum(g * g)))
    step = cfg.initial_step
    previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
    decrease = math.inf
    converged = False
    iterations = 0

    for iterations in range(max_iters):
        # 1. 수렴 판정 (첫 반복은 에너지 감소 조건을 생략)
        if grad_norm <= tol_grad and (previous is None or decrease <= cfg.tol_energy * max(abs(fx), 1.0)):
            converged = True
            break

        # 2. Barzilai-Borwein 시험 보폭
        if previous is not None:
            s = x - previous[0]
            y = g - previous[1]
            sy = float(np.sum(s * y))
            if sy > 0.0:
                step = float(np.sum(s * s)) / sy
            else:
                step = step * 2.0

        # 3. Armijo 역추적
        slack = 4.0 * np.finfo(np.float64).eps * abs(fx)
        trial = step
        accepted = False
        for _ in range(cfg.max_backtracks):
            candidate = retract(x - trial * g)
            fc = objective(candidate)
            if fc <= fx and fc <= fx - cfg.armijo_c * trial * grad_norm ** 2 + slack:
                accepted = True
                break
            trial *= cfg.backtrack

        if not accepted:
            converged = grad_norm <= tol_grad
            break

        previous = (x, g)
        decrease = fx - fc
        x, fx = candidate, fc
        g = tangent_gradient(x)
        grad_norm = math.sqrt(weight * float(np.sum(g * g)))
        step = trial
    else:
        converged = grad_norm <= tol_grad and decrease <= cfg.tol_energy * max(abs(fx), 1.0)

    return DescentOutcome(values=x, objective=fx, grad_norm=grad_norm, iterations=iterations, converged=converged)

@dataclass(frozen=True)
class ConstraintSpec:
    '''
    # 제약 집합: 구면 ‖u‖_q^q = k 또는 띠 k_lo ≤ ‖u‖_q^q ≤ k_hi
    '''
    mode: str
    k_lo: float
    k_hi: float

    def __post_init__(self) -> None:
        if self.mode not in ('sphere', 'band'):
            raise DomainError(f'알 수 없는 제약 종류입니다: {self.mode}')
        if not self.k_lo > 0.0:
            raise DomainError(f'k 는 양수여야 합니다: {self.k_lo}')
        if self.mode == 'band' and not self.k_lo < self.k_hi:
            raise DomainError(f'띠 제약은 k_lo < k_hi 이어야 합니다: [{self.k_lo}, {self.k_hi}]')

    @classmethod
    def sphere(cls, k: float) -> 'ConstraintSpec':
        return cls(mode='sphere', k_lo=k, k_hi=k)

    @classmethod
    def band(cls, k_lo: float, k_hi: float) -> 'ConstraintSpec':
        return cls(mode='band', k_lo=k_lo, k_hi=k_hi)

    def contains(self, k: float) -> bool:
        return self.k_lo * (1.0 - 1e-10) <= k <= self.k_hi * (1.0 + 1e-10)

@dataclass(frozen=True)
class MinimizeResult:
    '''
    # 제약 최소화 결과

    Attributes:
        minimizer    (ScalarField): 0 이상인 최소점
        mu           (float)      : 도달한 에너지 값
        multiplier   (float)      : G ≈ λ|u|^{q-2}u 의 라그랑주 승수 λ
        k_attained   (float)      : 최소점의 ‖u‖_q^q
        iterations   (int)        : 반복 수
        grad_norm    (float)      : 투영 기울기의 L² 노름
        stationarity (float)      : ‖G - λ|u|^{q-2}u‖₂
        converged    (bool)       : 수렴 여부
    '''
    minimizer: ScalarField
    mu: float
    multiplier: float
    k_attained: float
    iterations: int
    grad_norm: float
    stationarity: float
    converged: bool

@dataclass(frozen=True)
class LandscapeSample:
    k: float
    mu: float
    converged: bool
    minimizer: Optional[ScalarField] = field(default=None, compare=False, repr=False)

@dataclass(frozen=True)
class LandscapeCurve:
    '''
    # 고정된 (q, ε) 에서 표본 추출한 (k, μ_{k,q}^ε) 곡선
    '''
    q: float
    eps: float
    samples: Tuple[LandscapeSample, ...]

    @property
    def ks(self) -> List[float]:
        return [sample.k for sample in self.samples]

    @property
    def mus(self) -> List[float]:
        return [sample.mu for sample in self.samples]

@dataclass(frozen=True)
class ContinuityProbe:
    jump: float
    mu: float
    converged: bool

class ConstrainedMinimizer:
    '''
    # 하나의 (문제, 준임계 매개변수) 에 대해 구면/띠 제약 최소화를 수행하는 클래스

    Attributes:
        prob       (ProblemData)          : 문제 데이터
        sub        (SubcriticalParams)    : 준임계 매개변수
        cfg        (SolverConfig)         : 최소화 설정
        functional (SubcriticalFunctional): 에너지 값과 기울기 계산기
    '''
    def __init__(self, prob: ProblemData, sub: SubcriticalParams, cfg: SolverConfig, delta_reg: Optional[float] = None) -> None:
        self.prob = prob
        self.sub = sub
        self.cfg = cfg
        self.functional = SubcriticalFunctional(prob, sub, cfg.delta_reg if delta_reg is None else delta_reg)
        self._weight = prob.grid.cell_weight

    def lq_power(self, values: np.ndarray) -> float:
        return self._weight * float(np.sum(np.abs(values) ** self.sub.q))

    def _rescale(self, values: np.ndarray, k: float) -> np.ndarray:
        magnitude = np.abs(values)
        current = self.lq_power(magnitude)
        if current <= 0.0:
            raise DomainError('0 필드는 ‖u‖_q^q = k 로 다시 맞출 수 없습니다.')
        return magnitude * (k / current) ** (1.0 / self.sub.q)

    def _normal(self, values: np.ndarray) -> np.ndarray:
        # |u|^{q-2}u
        return np.sign(values) * np.abs(values) ** (self.sub.q - 1.0)

    def _multiplier(self, values: np.ndarray, gradient: np.ndarray) -> float:
        normal = self._normal(values)
        denominator = float(np.sum(normal * normal))
        return float(np.sum(gradient * normal)) / denominator if denominator > 0.0 else 0.0

    def _sphere_gradient(self, values: np.ndarray) -> np.ndarray:
        gradient = self.functional.gradient(values)
        return gradient - self._multiplier(values, gradient) * self._normal(values)

    def _band_gradient(self, values: np.ndarray, spec: ConstraintSpec) -> np.ndarray:
        gradient = self.functional.gradient(values)
        normal = self._normal(values)
        outward = float(np.sum(gradient * normal))
        k = self.lq_power(values)

        on_upper = k >= spec.k_hi * (1.0 - BOUND_TOLERANCE)
        on_lower = k <= spec.k_lo * (1.0 + BOUND_TOLERANCE)

        # -G 방향이 띠 밖으로 향할 때만 경계면에 투영
        if (on_upper and outward < 0.0) or (on_lower and outward > 0.0):
            return gradient - self._multiplier(values, gradient) * normal
        return gradient

    def _band_retract(self, values: np.ndarray, spec: ConstraintSpec) -> np.ndarray:
        magnitude = np.abs(values)
        k = self.lq_power(magnitude)
        if k > spec.k_hi:
            return self._rescale(magnitude, spec.k_hi)
        if k < spec.k_lo:
            return self._rescale(magnitude, spec.k_lo)
        return magnitude

    def initial_field(self, k: float) -> np.ndarray:
        '''
        # 상수 k^{1/q} 에 시드 고정 매끄러운 섭동을 더한 초기값을 만드는 함수
        '''
        rng = np.random.default_rng(self.cfg.seed)
        level = k ** (1.0 / self.sub.q)
        perturbation = smooth_random_field(self.prob.grid, rng).values
        return level * (1.0 + self.cfg.init_perturbation * perturbation)

    def _start(self, spec: ConstraintSpec, init: Optional[ScalarField]) -> np.ndarray:
        if init is None:
            target = spec.k_lo if spec.mode == 'sphere' else math.sqrt(spec.k_lo * spec.k_hi)
            values = self.initial_field(target)
        else:
            values = init.values

        if spec.mode == 'sphere':
            return self._rescale(values, spec.k_lo)
        return self._band_retract(values, spec)

    def _result(self, outcome: DescentOutcome, spec: ConstraintSpec) -> MinimizeResult:
        values = outcome.values
        try:
            gradient = self.functional.gradient(values)
            multiplier = self._multiplier(values, gradient)
            residual = gradient - multiplier * self._normal(values)
            stationarity = math.sqrt(self._weight * float(np.sum(residual * residual)))
        except ArithmeticError:
            multiplier, stationarity = math.nan, math.inf

        if not outcome.converged:
            logger.warning(f'{spec.mode} 제약 최소화가 수렴하지 않았습니다 (k∈[{spec.k_lo:.6g}, {spec.k_hi:.6g}], 반복 {outcome.iterations}, 기울기 {outcome.grad_norm:.3e})')

        return MinimizeResult(
            minimizer=ScalarField(self.prob.grid, values),
            mu=outcome.objective,
            multiplier=multiplier,
            k_attained=self.lq_power(values),
            iterations=outcome.iterations,
            grad_norm=outcome.grad_norm,
            stationarity=stationarity,
            converged=outcome.converged,
        )

    def minimize(self, spec: ConstraintSpec, init: Optional[ScalarField] = None) -> MinimizeResult:
        '''
        # 제약 집합 위에서 I_q^ε 를 최소화하는 함수

        Args:
            spec (ConstraintSpec)       : 구면 또는 띠 제약
            init (Optional[ScalarField]): 초기값 (없으면 상수 + 섭동)

        Returns:
            MinimizeResult: 최소점, μ, 승수, 수렴 정보
        '''
        start = self._start(spec, init)

        if spec.mode == 'sphere':
            outcome = projected_descent(
                objective=self.functional.value,
                tangent_gradient=self._sphere_gradient,
                retract=lambda values: self._rescale(values, spec.k_lo),
                start=start,
                weight=self._weight,
                cfg=self.cfg,
            )
        else:
            outcome = projected_descent(
                objective=self.functional.value,
                tangent_gradient=lambda values: self._band_gradient(values, spec),
                retract=lambda values: self._band_retract(values, spec),
                start=start,
                weight=self._weight,
                cfg=self.cfg,
            )

        return self._result(outcome, spec)

    def minimize_on_sphere(self, k: float, init: Optional[ScalarField] = None) -> MinimizeResult:
        return self.minimize(ConstraintSpec.sphere(k), init)

    def minimize_on_band(self, k_lo: float, k_hi: float, init: Optional[ScalarField] = None) -> MinimizeResult:
        return self.minimize(ConstraintSpec.band(k_lo, k_hi), init)

    def landscape(self, k_grid: Sequence[float], init: Optional[ScalarField] = None, progress: bool = True) -> LandscapeCurve:
        '''
        # k 격자마다 구면 최소화를 수행해 에너지 지형을 구하는 함수 (직전 최소점으로 웜 스타트)

        Args:
            k_grid   (Sequence[float])      : 오름차순 k 값
            init     (Optional[ScalarField]): 첫 표본의 초기값
            progress (bool)                 : 진행 막대 표시 여부

        Returns:
            LandscapeCurve: k 순서로 정렬된 (k, μ, 수렴 여부) 표본
        '''
        ks = [float(k) for k in k_grid]
        if any(right <= left for left, right in zip(ks, ks[1:])):
            raise DomainError('k 격자는 순증가해야 합니다.')

        samples: List[LandscapeSample] = []
        warm = init
        for k in tqdm(ks, desc=f'Landscape q={self.sub.q:.4g}', disable=not progress):
            result = self.minimize_on_sphere(k, warm)
            samples.append(LandscapeSample(k=k, mu=result.mu, converged=result.converged, minimizer=result.minimizer))
            warm = result.minimizer

        return LandscapeCurve(q=self.sub.q, eps=self.sub.eps, samples=tuple(samples))

    def probe_continuity(self, k: float, rel_step: float) -> ContinuityProbe:
        '''
        # μ_k 와 μ_{k(1±r)} 의 최대 차이로 k 에 대한 연속성을 점검하는 함수
        '''
        base = self.minimize_on_sphere(k)
        if rel_step == 0.0:
            return ContinuityProbe(jump=0.0, mu=base.mu, converged=base.converged)

        upper = self.minimize_on_sphere(k * (1.0 + rel_step), base.minimizer)
        lower = self.minimize_on_sphere(k * (1.0 - rel_step), base.minimizer)
        jump = max(abs(upper.mu - base.mu), abs(lower.mu - base.mu))
        converged = base.converged and upper.converged and lower.converged

        if not converged:
            logger.warning(f'연속성 점검 중 수렴하지 않은 최소화가 있습니다 (k={k:.6g})')
        return ContinuityProbe(jump=jump, mu=base.mu, converged=converged)

def minimize_on_sphere(prob: ProblemData, sub: SubcriticalParams, k: float, init: Optional[ScalarField], cfg: SolverConfig) -> MinimizeResult:
    return ConstrainedMinimizer(prob, sub, cfg).minimize_on_sphere(k, init)

def minimize_on_band(prob: ProblemData, sub: SubcriticalParams, band: Tuple[float, float], init: Optional[ScalarField], cfg: SolverConfig) -> MinimizeResult:
    return ConstrainedMinimizer(prob, sub, cfg).minimize_on_band(band[0], band[1], init)

def landscape(prob: ProblemData, sub: SubcriticalParams, k_grid: Sequence[float], cfg: SolverConfig) -> LandscapeCurve:
    return ConstrainedMinimizer(prob, sub, cfg).landscape(k_grid)

def continuity_probe(prob: ProblemData, sub: SubcriticalParams, k: float, rel_step: float, cfg: SolverConfig) -> float:
    return ConstrainedMinimizer(prob, sub, cfg).probe_continuity(k, rel_step).jump

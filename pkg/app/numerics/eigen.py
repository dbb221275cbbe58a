'''
# 일반화 첫 고유값 λ_f, λ_{f,η,q} (부등식 변형 λ'_{f,η,q} 포함) 와 η 스캔
'''
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse.linalg as spla
from scipy.optimize import brentq
from tqdm import tqdm

from app.core.config import settings
from app.core.exceptions import DomainError, InfeasibleConstraintError
from app.core.logger import logger
from app.core.run_config import SolverConfig
from app.numerics.energy import ProblemData, SubcriticalParams
from app.numerics.minimize import projected_descent
from app.numerics.thresholds import unbounded_spectrum_threshold
from app.numerics.torus_field import (
    ScalarField,
    TorusGrid,
    gradient_density_values,
    gradient_matrices,
    p_laplacian_values,
    resolve_delta_reg,
    smooth_random_field,
)

DENSE_LIMIT: int = 64
REPAIR_TOLERANCE: float = 1e-12

@dataclass(frozen=True)
class EigenResult:
    '''
    # 일반화 고유값 계산 결과

    Attributes:
        value               (float)                : 고유값 (𝒜 가 비어 있으면 math.inf)
        argmin              (Optional[ScalarField]): 최소화 필드 (없으면 None)
        constraint_residual (float)                : 제약식 잔차
        converged           (bool)                 : 수렴 여부
    '''
    value: float
    argmin: Optional[ScalarField] = field(default=None, compare=False, repr=False)
    constraint_residual: float = 0.0
    converged: bool = True

@dataclass(frozen=True)
class EtaSample:
    eta: float
    value: float
    converged: bool

@dataclass(frozen=True)
class EtaScan:
    '''
    # η 스캔 결과

    Attributes:
        samples  (Tuple[EtaSample, ...]): η 순서의 (η, λ_{f,η,q}) 표본
        lambda_f (float)                : 비교 기준 λ_f
        eta0     (Optional[float])      : 판정 기준을 만족하는 가장 큰 η (없으면 None)
    '''
    samples: Tuple[EtaSample, ...]
    lambda_f: float
    eta0: Optional[float]

def rayleigh_quotient(u: ScalarField, p: float, delta_reg: Optional[float] = None) -> float:
    '''
    # ∫|∇u|^p / ∫|u|^p 를 계산하는 함수 (u 의 상수배에 대해 불변)

    Raises:
        DomainError: u ≡ 0
    '''
    delta = resolve_delta_reg(p, delta_reg)
    denominator = float(np.sum(np.abs(u.values) ** p))
    if denominator <= 0.0:
        raise DomainError('0 필드의 레일리 몫은 정의되지 않습니다.')
    return float(np.sum(gradient_density_values(u.values, u.grid.spacing, p, delta))) / denominator

def _dirichlet_pair(grid: TorusGrid, free: np.ndarray) -> Tuple[float, np.ndarray]:
    # 자유 격자점으로 제한한 L = Σ D_iᵀD_i 의 가장 작은 고유쌍 (셀 가중치는 약분됨)
    laplacian = sum(matrix.T @ matrix for matrix in gradient_matrices(grid)).tocsr()
    index = np.flatnonzero(free.ravel())
    restricted = laplacian[index][:, index]

    if index.size <= DENSE_LIMIT:
        values, vectors = np.linalg.eigh(restricted.toarray())
    else:
        values, vectors = spla.eigsh(restricted.tocsc(), k=1, sigma=0.0, which='LM')

    full = np.zeros(grid.size)
    full[index] = np.abs(vectors[:, 0])
    return max(float(values[0]), 0.0), full.reshape(grid.shape)

class EigenSolver:
    '''
    # 하나의 문제 데이터에 대해 일반화 고유값을 계산하는 클래스

    Attributes:
        prob  (ProblemData) : 문제 데이터
        cfg   (SolverConfig): 허용 오차, 시드, 다중 시작 수
        delta (float)       : 기울기 정칙화 값
    '''
    def __init__(self, prob: ProblemData, cfg: SolverConfig) -> None:
        self.prob = prob
        self.cfg = cfg
        self.delta = resolve_delta_reg(prob.p, cfg.delta_reg)
        self._grid = prob.grid
        self._weight = prob.grid.cell_weight
        self._f_minus = prob.f_minus
        self._lambda_f: Optional[EigenResult] = None

    # 레일리 몫과 그 L² 기울기
    def _quotient(self, values: np.ndarray) -> float:
        denominator = float(np.sum(np.abs(values) ** self.prob.p))
        if denominator <= 0.0:
            return math.inf
        numerator = float(np.sum(gradient_density_values(values, self._grid.spacing, self.prob.p, self.delta)))
        return numerator / denominator

    def _quotient_gradient(self, values: np.ndarray) -> np.ndarray:
        p = self.prob.p
        denominator = self._weight * float(np.sum(np.abs(values) ** p))
        quotient = self._quotient(values)
        power = np.sign(values) * np.abs(values) ** (p - 1.0)
        return p / denominator * (p_laplacian_values(values, self._grid.spacing, p, self.delta) - quotient * power)

    def _normalize(self, values: np.ndarray, r: float) -> np.ndarray:
        magnitude = np.abs(values)
        total = self._weight * float(np.sum(magnitude ** r))
        return magnitude / total ** (1.0 / r) if total > 0.0 else magnitude

    def _seed_fields(self, count: int) -> List[np.ndarray]:
        seeds = []
        for index in range(count):
            rng = np.random.default_rng(self.cfg.seed + index)
            seeds.append(np.abs(1.0 + 0.5 * smooth_random_field(self._grid, rng).values))
        return seeds

    def _run_pool(self, task: Callable, starts: Sequence[np.ndarray]) -> List:
        with ThreadPoolExecutor(max_workers=settings.THREADS) as executor:
            return list(executor.map(task, starts))

    def lambda_f(self) -> EigenResult:
        '''
        # f < 0 인 격자점에서 0 이 되는 0 이상의 필드 위에서 레일리 몫을 최소화하는 함수

        Returns:
            EigenResult: λ_f (모든 격자점에서 f < 0 이면 math.inf)
        '''
        if self._lambda_f is not None:
            return self._lambda_f

        mask = self.prob.f.values < 0.0
        p = self.prob.p

        if np.all(mask):
            result = EigenResult(value=math.inf, argmin=None, constraint_residual=0.0, converged=True)
        elif not np.any(mask):
            result = EigenResult(value=0.0, argmin=ScalarField.constant(self._grid, 1.0), constraint_residual=0.0, converged=True)
        else:
            value, vector = _dirichlet_pair(self._grid, ~mask)
            if p == 2.0:
                result = EigenResult(value=value, argmin=ScalarField(self._grid, self._normalize(vector, p)), converged=True)
            else:
                result = self._masked_descent(mask, vector)

        logger.info(f'λ_f 계산 완료: {result.value:.10g} (수렴 {result.converged})')
        self._lambda_f = result
        return result

    def _masked_descent(self, mask: np.ndarray, warm: np.ndarray) -> EigenResult:
        p = self.prob.p

        def retract(values: np.ndarray) -> np.ndarray:
            return self._normalize(np.where(mask, 0.0, values), p)

        def gradient(values: np.ndarray) -> np.ndarray:
            return np.where(mask, 0.0, self._quotient_gradient(values))

        def run(start: np.ndarray):
            return projected_descent(
                objective=self._quotient,
                tangent_gradient=gradient,
                retract=retract,
                start=retract(start),
                weight=self._weight,
                cfg=self.cfg,
                max_iters=self.cfg.eigen_max_iters,
                tol_grad=self.cfg.eigen_tol,
            )

        starts = [warm] + self._seed_fields(self.cfg.eigen_starts)
        outcomes = self._run_pool(run, starts)
        best = min(outcomes, key=lambda outcome: outcome.objective)

        if not best.converged:
            logger.warning(f'λ_f 하강이 수렴하지 않았습니다 (기울기 {best.grad_norm:.3e})')

        return EigenResult(
            value=best.objective,
            argmin=ScalarField(self._grid, best.values),
            constraint_residual=float(np.max(np.abs(best.values[mask]))),
            converged=best.converged,
        )

    # ∫|f⁻||u|^q / ∫|u|^q 와 그 기울기 (둘 다 u 의 상수배에 대해 불변)
    def _ratio(self, values: np.ndarray, q: float) -> float:
        power = np.abs(values) ** q
        total = float(np.sum(power))
        return float(np.sum(self._f_minus * power)) / total if total > 0.0 else 0.0

    def _ratio_gradient(self, values: np.ndarray, q: float) -> np.ndarray:
        total = self._weight * float(np.sum(np.abs(values) ** q))
        ratio = self._ratio(values, q)
        return q / total * (self._f_minus - ratio) * np.sign(values) * np.abs(values) ** (q - 1.0)

    def _check_feasible(self, target: float, inequality: bool) -> None:
        lowest = float(np.min(self._f_minus))
        highest = float(np.max(self._f_minus))

        if inequality and target < lowest:
            raise InfeasibleConstraintError(f'ηF={target:.6g} 가 min|f⁻|={lowest:.6g} 보다 작아 부등식 제약을 만족할 수 없습니다.')
        if not inequality and not lowest <= target <= highest:
            raise InfeasibleConstraintError(f'ηF={target:.6g} 가 [{lowest:.6g}, {highest:.6g}] 밖에 있어 등식 제약을 만족할 수 없습니다.')

    def _shift_to(self, values: np.ndarray, target: float, q: float) -> Optional[np.ndarray]:
        # u + τ 의 비율은 τ → ∞ 에서 ∫|f⁻| 로 수렴
        if not self._ratio(values, q) < target < self.prob.F_minus:
            return None

        scale = max(float(np.max(values)), 1.0)
        upper = scale
        while self._ratio(values + upper, q) < target:
            upper *= 2.0
            if upper > 1e12 * scale:
                return None

        tau = brentq(lambda t: self._ratio(values + t, q) - target, 0.0, upper, xtol=REPAIR_TOLERANCE * scale, rtol=4 * np.finfo(float).eps)
        return values + tau

    def _scale_to(self, values: np.ndarray, target: float, q: float) -> Optional[np.ndarray]:
        # 비율을 목표 쪽으로 끌어당기는 반대편 영역을 t ∈ [0, 1] 배로 축소
        ratio = self._ratio(values, q)
        region = self._f_minus > target if ratio > target else self._f_minus < target
        kept = values * ~region
        if not np.any(kept > 0.0):
            return None

        def shifted(t: float) -> float:
            return self._ratio(np.where(region, t * values, values), q) - target

        t = brentq(shifted, 0.0, 1.0, xtol=REPAIR_TOLERANCE, rtol=4 * np.finfo(float).eps)
        return np.where(region, t * values, values)

    def _repair(self, values: np.ndarray, target: float, q: float, inequality: bool) -> Optional[np.ndarray]:
        '''
        # 후보 필드를 제약식을 정확히 만족하도록 보정하는 함수 (실패 시 None)
        '''
        values = np.abs(values)
        ratio = self._ratio(values, q)
        violation = ratio - target

        if abs(violation) <= REPAIR_TOLERANCE * max(target, 1.0) or (inequality and violation <= 0.0):
            repaired = values
        elif violation < 0.0:
            repaired = self._shift_to(values, target, q)
            if repaired is None:
                repaired = self._scale_to(values, target, q)
        else:
            repaired = self._scale_to(values, target, q)

        if repaired is None:
            return None
        return self._normalize(repaired, q)

    def _augmented_lagrangian(self, start: np.ndarray, target: float, q: float, inequality: bool) -> Tuple[np.ndarray, bool]:
        multiplier = 0.0
        rho = self.cfg.al_rho0
        previous_violation = math.inf
        values = self._normalize(start, q)
        converged = False

        for _ in range(self.cfg.al_max_outer):
            nu, penalty = multiplier, rho

            def effective(c: float) -> float:
                return max(0.0, nu + penalty * c) if inequality else nu + penalty * c

            def objective(v: np.ndarray) -> float:
                c = self._ratio(v, q) - target
                if inequality:
                    extra = (max(0.0, nu + penalty * c) ** 2 - nu ** 2) / (2.0 * penalty)
                else:
                    extra = nu * c + 0.5 * penalty * c * c
                return self._quotient(v) + extra

            def gradient(v: np.ndarray) -> np.ndarray:
                c = self._ratio(v, q) - target
                return self._quotient_gradient(v) + effective(c) * self._ratio_gradient(v, q)

            outcome = projected_descent(
                objective=objective,
                tangent_gradient=gradient,
                retract=lambda v: self._normalize(v, q),
                start=values,
                weight=self._weight,
                cfg=self.cfg,
                max_iters=self.cfg.eigen_max_iters,
                tol_grad=self.cfg.eigen_tol,
            )
            values = outcome.values

            c = self._ratio(values, q) - target
            multiplier = effective(c)
            violation = max(c, 0.0) if inequality else abs(c)

            if violation <= self.cfg.eigen_tol and outcome.converged:
                converged = True
                break
            if violation > 0.25 * previous_violation:
                rho *= 10.0
            previous_violation = violation

        return values, converged

    def lambda_f_eta_q(self, sub: SubcriticalParams, eta: float, inequality: bool = False, warm: Optional[ScalarField] = None) -> EigenResult:
        '''
        # ‖u‖_q = 1, ∫|f⁻||u|^q (= 또는 ≤) η∫|f⁻| 제약 아래 레일리 몫을 최소화하는 함수

        후보 (상수, λ_f 최소점을 옮긴 필드, 웜 스타트, 시드 필드) 마다 증강 라그랑지안을
        실행하고, 제약식을 정확히 만족하도록 보정한 후보 중 최솟값을 반환한다.

        Args:
            sub        (SubcriticalParams)    : q 를 제공하는 준임계 매개변수
            eta        (float)                : 양수 η
            inequality (bool)                 : True 이면 λ'_{f,η,q} (≤ 제약)
            warm       (Optional[ScalarField]): 이전 η 의 최소점

        Returns:
            EigenResult: λ_{f,η,q}, 최소점, 제약 잔차, 수렴 여부

        Raises:
            DomainError              : η ≤ 0
            InfeasibleConstraintError: 제약식을 만족하는 필드가 없는 경우
        '''
        if eta <= 0.0:
            raise DomainError(f'η 는 양수여야 합니다: {eta}')

        q = sub.q
        F = self.prob.F_minus
        constant = self._normalize(np.ones(self._grid.shape), q)

        if F == 0.0:
            return EigenResult(value=0.0, argmin=ScalarField(self._grid, constant), constraint_residual=0.0, converged=True)

        target = eta * F
        self._check_feasible(target, inequality)

        candidates: List[np.ndarray] = [constant]
        lambda_f = self.lambda_f()
        if lambda_f.argmin is not None:
            candidates.append(lambda_f.argmin.values)
        if warm is not None:
            candidates.append(warm.values)
        candidates.extend(self._seed_fields(self.cfg.eigen_starts))

        starts = [repaired for repaired in (self._repair(values, target, q, inequality) for values in candidates) if repaired is not None]
        if not starts:
            raise InfeasibleConstraintError(f'η={eta} 에서 제약식을 만족하는 시작 필드를 만들 수 없습니다.')

        def refine(start: np.ndarray) -> Tuple[Optional[np.ndarray], bool]:
            values, converged = self._augmented_lagrangian(start, target, q, inequality)
            return self._repair(values, target, q, inequality), converged

        refined = self._run_pool(refine, starts)

        pool: List[Tuple[float, np.ndarray, bool]] = [(self._quotient(values), values, False) for values in starts]
        pool.extend((self._quotient(values), values, converged) for values, converged in refined if values is not None)

        best_value, best_values, _ = min(pool, key=lambda item: item[0])
        converged = any(converged for value, _, converged in pool if value <= best_value + self.cfg.eigen_tol * max(1.0, best_value))

        residual = self._ratio(best_values, q) - target
        residual = max(residual, 0.0) if inequality else abs(residual)

        if not converged:
            logger.warning(f'λ_(f,η,q) 계산이 수렴하지 않았습니다 (η={eta}, q={q:.6g})')

        return EigenResult(value=best_value, argmin=ScalarField(self._grid, best_values), constraint_residual=residual, converged=converged)

    def eta_scan(self, sub: SubcriticalParams, etas: Sequence[float], delta: Optional[float] = None, inequality: bool = True) -> EtaScan:
        '''
        # 오름차순 η 목록에 대해 λ_{f,η,q} 를 웜 스타트로 계산하고 η₀ 를 고르는 함수

        λ_f 가 유한하면 λ ≥ λ_f - δ, λ_f = +∞ 이면 λ > |h| 를 만족하는 가장 큰 η 를 η₀ 로 보고한다.

        Args:
            sub        (SubcriticalParams): 준임계 매개변수
            etas       (Sequence[float])  : 양수 η 목록 (오름차순)
            delta      (Optional[float])  : 허용 간격 δ (없으면 λ_f 의 1%)
            inequality (bool)             : 부등식 제약 사용 여부

        Returns:
            EtaScan: 표본, λ_f, η₀
        '''
        etas = [float(eta) for eta in etas]
        if any(eta <= 0.0 for eta in etas) or etas != sorted(etas):
            raise DomainError('η 목록은 양수의 오름차순이어야 합니다.')

        lambda_f = self.lambda_f().value
        if delta is None:
            delta = 0.01 * lambda_f if math.isfinite(lambda_f) else 0.0

        samples: List[EtaSample] = []
        warm: Optional[ScalarField] = None
        eta0: Optional[float] = None

        for eta in tqdm(etas, desc='η scan'):
            result = self.lambda_f_eta_q(sub, eta, inequality=inequality, warm=warm)
            samples.append(EtaSample(eta=eta, value=result.value, converged=result.converged))
            warm = result.argmin

            if math.isfinite(lambda_f):
                qualifies = result.value >= lambda_f - delta
            else:
                qualifies = result.value > unbounded_spectrum_threshold(self.prob.h)
            if qualifies:
                eta0 = eta

        logger.info(f'η 스캔 완료: λ_f={lambda_f:.6g}, η₀={eta0}')
        return EtaScan(samples=tuple(samples), lambda_f=lambda_f, eta0=eta0)

def lambda_f(prob: ProblemData, cfg: SolverConfig) -> EigenResult:
    return EigenSolver(prob, cfg).lambda_f()

def lambda_f_eta_q(prob: ProblemData, sub: SubcriticalParams, eta: float, inequality: bool, cfg: SolverConfig) -> EigenResult:
    return EigenSolver(prob, cfg).lambda_f_eta_q(sub, eta, inequality)

def eta_scan(prob: ProblemData, sub: SubcriticalParams, etas: Sequence[float], cfg: SolverConfig, delta: Optional[float] = None) -> EtaScan:
    return EigenSolver(prob, cfg).eta_scan(sub, etas, delta)

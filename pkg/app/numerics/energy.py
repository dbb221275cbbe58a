'''
# 정칙화된 준임계 에너지 범함수 I_q^ε 와 그 제1변분, 분해 범함수 G_q
'''
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.exceptions import DomainError, GridError, SingularTermError
from app.numerics.torus_field import (
    ScalarField,
    TorusGrid,
    gradient_density_values,
    integrate,
    p_laplacian_values,
    resolve_delta_reg,
)

@dataclass(frozen=True, eq=False)
class ProblemData:
    '''
    # 방정식 Δ_p u + h u^{p-1} = f u^{p*-1} + a u^{-p*-1} 의 지수와 계수

    Attributes:
        n (int)        : 공간 차원
        p (float)      : 지수 (1 < p < n)
        h (float)      : 음의 상수 계수
        f (ScalarField): 부호가 바뀔 수 있는 계수
        a (ScalarField): 0 이상인 계수
    '''
    n: int
    p: float
    h: float
    f: ScalarField
    a: ScalarField

    def __post_init__(self) -> None:
        if self.f.grid != self.a.grid:
            raise GridError('f 와 a 는 같은 격자 위에 있어야 합니다.')
        if self.f.grid.n != self.n:
            raise GridError(f'격자 차원 {self.f.grid.n} 과 문제 차원 {self.n} 이 다릅니다.')
        if not 1.0 < self.p < self.n:
            raise DomainError(f'지수 범위 1 < p < n 을 벗어났습니다: p={self.p}, n={self.n}')
        if not self.h < 0.0:
            raise DomainError(f'h 는 음수여야 합니다: h={self.h}')
        if np.any(self.a.values < 0.0):
            raise DomainError('a 는 모든 격자점에서 0 이상이어야 합니다.')

    @property
    def grid(self) -> TorusGrid:
        return self.f.grid

    @property
    def p_star(self) -> float:
        return self.n * self.p / (self.n - self.p)

    @property
    def p_flat(self) -> float:
        return self.p * (2 * self.n - self.p) / (2 * (self.n - self.p))

    @property
    def f_minus(self) -> np.ndarray:
        # |f⁻| = max(-f, 0)
        return np.maximum(-self.f.values, 0.0)

    @property
    def f_plus(self) -> np.ndarray:
        return np.maximum(self.f.values, 0.0)

    @property
    def F_minus(self) -> float:
        return integrate(ScalarField(self.grid, self.f_minus))

    @property
    def F_plus(self) -> float:
        return integrate(ScalarField(self.grid, self.f_plus))

    @property
    def int_f(self) -> float:
        return integrate(self.f)

    @property
    def int_a(self) -> float:
        return integrate(self.a)

    @property
    def sup_f(self) -> float:
        return float(np.max(self.f.values))

    @property
    def inf_f(self) -> float:
        return float(np.min(self.f.values))

    def with_coefficients(self, f: ScalarField, a: ScalarField) -> 'ProblemData':
        return ProblemData(n=self.n, p=self.p, h=self.h, f=f, a=a)

@dataclass(frozen=True)
class SubcriticalParams:
    '''
    # 준임계 지수 q 와 특이항 정칙화 ε

    q = p* 는 ε = 0 과 함께일 때만 임계 범함수로 허용된다.
    '''
    q: float
    eps: float

    def __post_init__(self) -> None:
        if self.q <= 1.0:
            raise DomainError(f'q 는 1 보다 커야 합니다: q={self.q}')
        if self.eps < 0.0:
            raise DomainError(f'ε 는 0 이상이어야 합니다: eps={self.eps}')

    def check_subcritical(self, prob: ProblemData) -> None:
        '''
        # q ∈ (p♭, p*] 범위와 q = p* ⇒ ε = 0 조건을 검사하는 함수

        Raises:
            DomainError: 조건을 벗어난 경우
        '''
        if not self.q > prob.p_flat:
            raise DomainError(f'q 는 p♭={prob.p_flat} 보다 커야 합니다: q={self.q}')
        if self.q > prob.p_star * (1.0 + 1e-14):
            raise DomainError(f'q 는 p*={prob.p_star} 이하여야 합니다: q={self.q}')
        if math.isclose(self.q, prob.p_star, rel_tol=1e-14) and self.eps != 0.0:
            raise DomainError('q = p* 에서는 ε = 0 이어야 합니다.')

    @classmethod
    def critical(cls, prob: ProblemData) -> 'SubcriticalParams':
        return cls(q=prob.p_star, eps=0.0)

class SubcriticalFunctional:
    '''
    # 격자 배열 위에서 I_q^ε 의 값과 L² 기울기를 계산하는 클래스

    최소화 루프에서 ScalarField 생성 비용 없이 배열을 직접 다룬다.

    Attributes:
        prob  (ProblemData)      : 문제 데이터
        sub   (SubcriticalParams): 준임계 매개변수
        delta (float)            : 기울기 정칙화 값
    '''
    def __init__(self, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> None:
        self.prob = prob
        self.sub = sub
        self.delta = resolve_delta_reg(prob.p, delta_reg)
        self._weight = prob.grid.cell_weight
        self._spacing = prob.grid.spacing
        self._f = prob.f.values
        self._a = prob.a.values
        self._a_mask = self._a > 0.0

    def _singular(self, values: np.ndarray) -> bool:
        return self.sub.eps == 0.0 and bool(np.any(values[self._a_mask] == 0.0))

    def value(self, values: np.ndarray) -> float:
        '''
        # I_q^ε(u) 를 계산하는 함수 (특이항이 발산하면 +inf)
        '''
        p, q, eps = self.prob.p, self.sub.q, self.sub.eps
        if self._singular(values):
            return math.inf

        magnitude = np.abs(values)
        with np.errstate(over='ignore', divide='ignore'):
            gradient_term = np.sum(gradient_density_values(values, self._spacing, p, self.delta)) / p
            h_term = self.prob.h * np.sum(magnitude ** p) / p
            f_term = -np.sum(self._f * magnitude ** q) / q
            a_term = np.sum(self._a[self._a_mask] / (values[self._a_mask] ** 2 + eps) ** (q / 2.0)) / q

        total = self._weight * (gradient_term + h_term + f_term + a_term)
        return float(total) if np.isfinite(total) else math.inf

    def gradient(self, values: np.ndarray) -> np.ndarray:
        '''
        # integrate(G·φ) = δI(u)(φ) 를 만족하는 격자점별 기울기 G 를 계산하는 함수

        Raises:
            SingularTermError: ε = 0 이고 a > 0 인 지점에서 u = 0
        '''
        p, q, eps = self.prob.p, self.sub.q, self.sub.eps
        if self._singular(values):
            raise SingularTermError('ε = 0 에서 a > 0 인 격자점의 u 가 0 이므로 제1변분이 발산합니다.')

        magnitude = np.abs(values)
        sign = np.sign(values)
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            result = p_laplacian_values(values, self._spacing, p, self.delta)
            result = result + self.prob.h * sign * magnitude ** (p - 1.0)
            result = result - self._f * sign * magnitude ** (q - 1.0)
            singular = np.zeros_like(values)
            singular[self._a_mask] = self._a[self._a_mask] * values[self._a_mask] / (values[self._a_mask] ** 2 + eps) ** (q / 2.0 + 1.0)
            result = result - singular

        if not np.all(np.isfinite(result)):
            raise SingularTermError('제1변분 값이 유한하지 않습니다 (flagged overflow).')
        return result

def energy(u: ScalarField, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> float:
    '''
    # I_q^ε(u) = (1/p)∫|∇u|^p + (h/p)∫|u|^p - (1/q)∫f|u|^q + (1/q)∫a/(u²+ε)^{q/2}

    Args:
        u         (ScalarField)      : 평가할 필드
        prob      (ProblemData)      : 문제 데이터
        sub       (SubcriticalParams): 준임계 매개변수
        delta_reg (Optional[float])  : 기울기 정칙화

    Returns:
        float: 에너지 값 (ε = 0 에서 특이항이 발산하면 math.inf)
    '''
    return SubcriticalFunctional(prob, sub, delta_reg).value(u.values)

def first_variation(u: ScalarField, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> ScalarField:
    '''
    # G = Δ_p u + h|u|^{p-2}u - f|u|^{q-2}u - a u/(u²+ε)^{q/2+1}

    Raises:
        SingularTermError: ε = 0 이고 a > 0 인 지점에서 u 가 0 인 경우
    '''
    return ScalarField(u.grid, SubcriticalFunctional(prob, sub, delta_reg).gradient(u.values))

def g_q(u: ScalarField, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> float:
    # (1/p)∫|∇u|^p + (h/p)∫|u|^p + (1/q)∫|f⁻||u|^q
    p, q = prob.p, sub.q
    delta = resolve_delta_reg(p, delta_reg)
    magnitude = np.abs(u.values)

    total = (
        np.sum(gradient_density_values(u.values, u.grid.spacing, p, delta)) / p
        + prob.h * np.sum(magnitude ** p) / p
        + np.sum(prob.f_minus * magnitude ** q) / q
    )
    return float(u.grid.cell_weight * total)

def split_identity_gap(u: ScalarField, prob: ProblemData, sub: SubcriticalParams, delta_reg: Optional[float] = None) -> float:
    '''
    # I = G_q - (1/q)∫f⁺|u|^q + (1/q)∫a/(u²+ε)^{q/2} 분해식의 좌우 차이를 반환하는 함수
    '''
    q, eps = sub.q, sub.eps
    magnitude = np.abs(u.values)
    positive_part = integrate(ScalarField(u.grid, prob.f_plus * magnitude ** q)) / q

    mask = prob.a.values > 0.0
    singular = np.zeros(u.grid.shape)
    singular[mask] = prob.a.values[mask] / (u.values[mask] ** 2 + eps) ** (q / 2.0)
    singular_part = integrate(ScalarField(u.grid, singular)) / q

    return energy(u, prob, sub, delta_reg) - (g_q(u, prob, sub, delta_reg) - positive_part + singular_part)

def critical_energy(u: ScalarField, prob: ProblemData, delta_reg: Optional[float] = None) -> float:
    '''
    # q = p*, ε = 0 에서의 에너지 I_{p*}^0(u)
    '''
    return energy(u, prob, SubcriticalParams.critical(prob), delta_reg)

def constant_field_energy(k: float, prob: ProblemData, sub: SubcriticalParams) -> float:
    '''
    # 상수 시험 함수 u ≡ k^{1/q} 에서의 에너지 닫힌 식

    Args:
        k    (float)            : ‖u‖_q^q 값 (양수)
        prob (ProblemData)      : 문제 데이터
        sub  (SubcriticalParams): 준임계 매개변수

    Returns:
        float: (h/p)k^{p/q} - (k/q)∫f + (1/q)∫a/(k^{2/q}+ε)^{q/2}
    '''
    if k <= 0.0:
        raise DomainError(f'k 는 양수여야 합니다: k={k}')

    p, q, eps = prob.p, sub.q, sub.eps
    return prob.h / p * k ** (p / q) - k / q * prob.int_f + prob.int_a / q / (k ** (2.0 / q) + eps) ** (q / 2.0)

'''
# 존재/비존재 정리에 등장하는 닫힌 형태 상수와 가정 판정식
'''
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln
from tabulate import tabulate

from app.core.config import settings
from app.core.exceptions import DomainError
from app.numerics.energy import ProblemData
from app.numerics.torus_field import ScalarField, TorusGrid, gradient_density_values, integrate, smooth_random_field

SAFETY_FACTOR: float = 1.5
SUP_ZERO_TOLERANCE: float = 1e-12

def _check_exponents(n: int, p: float) -> None:
    if not 1.0 < p < n:
        raise DomainError(f'지수는 1 < p < n 을 만족해야 합니다 (p={p}, n={n})')

def _check_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise DomainError(f'{name} 는 양수여야 합니다: {value}')

def critical_exponent(n: int, p: float) -> float:
    return n * p / (n - p)

def flat_exponent(n: int, p: float) -> float:
    return p * (2 * n - p) / (2 * (n - p))

def sobolev_K(n: int, p: float) -> float:
    '''
    # ℝ^n 에서 ‖u‖_{p*} ≤ K‖∇u‖_p 의 최적 상수 K(n, p) (감마 함수 닫힌 식)

    Args:
        n (int)  : 차원
        p (float): 지수 (1 < p < n)

    Returns:
        float: K(n, p)

    Raises:
        DomainError: 1 < p < n 을 벗어난 경우
    '''
    _check_exponents(n, p)

    log_ratio = gammaln(1.0 + n / 2.0) + gammaln(n) - gammaln(n / p) - gammaln(1.0 + n - n / p)
    return float(
        math.pi ** -0.5
        * n ** (-1.0 / p)
        * ((p - 1.0) / (n - p)) ** (1.0 - 1.0 / p)
        * math.exp(log_ratio / n)
    )

def extremal_profile(n: int, p: float, r: float, scale: float = 1.0) -> float:
    # 최적 상수를 달성하는 방사 대칭 함수 (1 + scale·r^{p/(p-1)})^{-(n-p)/p}
    return (1.0 + scale * r ** (p / (p - 1.0))) ** (-(n - p) / p)

def sobolev_quotient_radial(n: int, p: float, scale: float = 1.0) -> float:
    '''
    # 방사 대칭 버블 함수에서 ‖u‖_{p*}/‖∇u‖_p 를 구적법으로 계산하는 함수

    구의 표면적은 양변에서 거듭제곱이 달라 약분되지 않으므로 포함한다.
    '''
    _check_exponents(n, p)
    _check_positive('scale', scale)

    p_star = critical_exponent(n, p)
    beta = p / (p - 1.0)
    gamma = (n - p) / p
    sphere = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)

    def derivative(r: float) -> float:
        return gamma * (1.0 + scale * r ** beta) ** (-gamma - 1.0) * scale * beta * r ** (beta - 1.0)

    gradient_power, _ = quad(lambda r: derivative(r) ** p * r ** (n - 1), 0.0, np.inf, limit=200)
    value_power, _ = quad(lambda r: extremal_profile(n, p, r, scale) ** p_star * r ** (n - 1), 0.0, np.inf, limit=200)

    return (sphere * value_power) ** (1.0 / p_star) / (sphere * gradient_power) ** (1.0 / p)

def _probe_fields(grid: TorusGrid, probes: int) -> List[np.ndarray]:
    fields_: List[np.ndarray] = [np.ones(grid.shape)]
    coords = grid.coordinates()

    # 축마다 단일 모드 파동과 그 평행 이동
    for axis, mode in itertools.product(range(grid.n), (1, 2)):
        wave = np.cos(2.0 * math.pi * mode * coords[axis])
        fields_.extend([wave, 1.0 + 0.5 * wave])

    for index in range(probes):
        rng = np.random.default_rng(index)
        fields_.append(smooth_random_field(grid, rng).values)

    return fields_

def calibrate_A(grid: TorusGrid, p: float, eps_sob: float, probes: int) -> float:
    '''
    # 격자 위에서 ‖u‖_{p*}^p ≤ (K^p + eps_sob)‖∇u‖_p^p + A‖u‖_p^p 를 만족하는 A 를 경험적으로 보정하는 함수

    탐침 집합 (상수, 단일 모드 파동, 시드 고정 무작위 필드) 에서 비율의 최댓값을
    0 이상으로 자르고 안전 계수 1.5 를 곱한다. 무작위 탐침은 시드 0 부터 차례로
    만들어지므로 probes 를 늘리면 A 는 줄어들지 않는다.

    Args:
        grid    (TorusGrid): 대상 격자
        p       (float)    : 지수
        eps_sob (float)    : 소볼레프 부등식의 ε (양수)
        probes  (int)      : 무작위 탐침 수

    Returns:
        float: 보정된 A
    '''
    _check_exponents(grid.n, p)
    _check_positive('eps_sob', eps_sob)

    p_star = critical_exponent(grid.n, p)
    leading = sobolev_K(grid.n, p) ** p + eps_sob
    weight = grid.cell_weight

    def ratio(values: np.ndarray) -> float:
        lp_power = weight * float(np.sum(np.abs(values) ** p))
        if lp_power <= 0.0:
            return 0.0
        critical_power = (weight * float(np.sum(np.abs(values) ** p_star))) ** (p / p_star)
        gradient_power = weight * float(np.sum(gradient_density_values(values, grid.spacing, p, 0.0)))
        return (critical_power - leading * gradient_power) / lp_power

    with ThreadPoolExecutor(max_workers=settings.THREADS) as executor:
        ratios = list(executor.map(ratio, _probe_fields(grid, probes)))

    return max(0.0, max(ratios)) * SAFETY_FACTOR

def k0(p: float, q: float, h: float, F_minus: float) -> float:
    # ((p+q)/(2p)·|h|/∫|f⁻|)^{q/(q-p)}
    if not q > p:
        raise DomainError(f'k₀ 는 q > p 에서 정의됩니다: p={p}, q={q}')
    _check_positive('∫|f⁻|', F_minus)
    return ((p + q) / (2.0 * p) * abs(h) / F_minus) ** (q / (q - p))

def k0_theorem2(p: float, q: float, h: float, int_f: float) -> float:
    '''
    # f ≤ 0 인 경우의 k₀ = ((q/p)·h/∫f)^{q/(q-p)}

    Raises:
        DomainError: q ≤ p 또는 ∫f ≥ 0
    '''
    if not q > p:
        raise DomainError(f'k₀ 는 q > p 에서 정의됩니다: p={p}, q={q}')
    if not int_f < 0.0:
        raise DomainError(f'∫f 는 음수여야 합니다: {int_f}')
    return (q / p * h / int_f) ** (q / (q - p))

def condition_1_3_rhs(n: int, p: float, h: float, F_minus: float) -> float:
    '''
    # ∫a 에 대한 상한 p/(2(n-p))·((2n-p)/(2(n-p)))^{2n/p-1}·(|h|/F)^{2n/p}·F

    q → p* 에서 phi_q 의 극한과 같다.
    '''
    _check_exponents(n, p)
    _check_positive('∫|f⁻|', F_minus)

    exponent = 2.0 * n / p
    return (
        p / (2.0 * (n - p))
        * ((2.0 * n - p) / (2.0 * (n - p))) ** (exponent - 1.0)
        * (abs(h) / F_minus) ** exponent
        * F_minus
    )

def phi_q(p: float, q: float, h: float, F_minus: float) -> float:
    # ∫a ≤ φ(q) 이면 μ_{k₀,q} ≤ 0
    if not q > p:
        raise DomainError(f'φ(q) 는 q > p 에서 정의됩니다: p={p}, q={q}')
    _check_positive('∫|f⁻|', F_minus)
    return ((p + q) / (2.0 * p) * abs(h) / F_minus) ** ((q + p) / (q - p)) * (abs(h) / (2.0 * p)) * (q - p)

def k1q_k2q(n: int, p: float, q: float, h: float, eta0: float, F_minus: float) -> Tuple[float, float]:
    '''
    # μ_{k,q} > 0 이 보장되는 구간 [k_{1,q}, k_{2,q}] 의 양 끝

    Returns:
        Tuple[float, float]: k₁ = (|h|q/(η₀F))^{q/(q-p)}, k₂ = 2^{n/p}·k₁
    '''
    if not q > p:
        raise DomainError(f'k_(1,q) 는 q > p 에서 정의됩니다: p={p}, q={q}')
    _check_positive('η₀', eta0)
    _check_positive('∫|f⁻|', F_minus)

    k1 = (abs(h) * q / (eta0 * F_minus)) ** (q / (q - p))
    return k1, 2.0 ** (n / p) * k1

def l_limit(n: int, p: float, h: float, eta0: float, F_minus: float) -> float:
    # q → p* 에서 k_{1,q} 의 극한 (|h|p*/(η₀F))^{n/p}
    _check_exponents(n, p)
    _check_positive('η₀', eta0)
    _check_positive('∫|f⁻|', F_minus)
    return (abs(h) * critical_exponent(n, p) / (eta0 * F_minus)) ** (n / p)

def spectral_margin(lambda_eta0: float, h: float, p: float) -> float:
    # δ = (λ_{f,η₀,q} + h)/p, m_and_Cq 에 넣는 δ
    return (lambda_eta0 + h) / p

def m_and_Cq(p: float, h: float, delta: float, K: float, A: float, eta0: float) -> Tuple[float, float]:
    '''
    # m = min{δ/(A+(K^p+1)(|h|+pδ)), (p-1)|h|/p} 와 C_q = η₀m/(4|h|)

    Args:
        p     (float): 지수
        h     (float): 음의 상수
        delta (float): 양수 δ
        K     (float): 소볼레프 최적 상수 (K^p 로 사용)
        A     (float): 보정된 A
        eta0  (float): η₀

    Returns:
        Tuple[float, float]: (m, C_q)
    '''
    _check_positive('δ', delta)

    Kp = K ** p
    m = min(delta / (A + (Kp + 1.0) * (abs(h) + p * delta)), (p - 1.0) * abs(h) / p)
    return m, eta0 * m / (4.0 * abs(h))

def C1(p: float, h: float, lambda_f: float, K: float, A: float, eta0: float) -> float:
    '''
    # q 에 무관한 상수 C₁ = (η₀/(4|h|))·min{(λ_f+h)/(2p[A+(K^p+1)λ_f]), (p-1)|h|/p}

    λ_f = +∞ 이면 첫 항은 극한값 1/(2p(K^p+1)) 을 사용한다.

    Raises:
        DomainError: λ_f ≤ |h|
    '''
    if not lambda_f + h > 0.0:
        raise DomainError(f'C₁ 은 |h| < λ_f 에서만 정의됩니다: λ_f={lambda_f}, h={h}')

    Kp = K ** p
    if math.isinf(lambda_f):
        first = 1.0 / (2.0 * p * (Kp + 1.0))
    else:
        first = (lambda_f + h) / (2.0 * p * (A + (Kp + 1.0) * lambda_f))
    return eta0 / (4.0 * abs(h)) * min(first, (p - 1.0) * abs(h) / p)

@dataclass(frozen=True)
class C2Result:
    '''
    # C₂, Λ 와 κ 판정

    Attributes:
        C2       (float): min{...,1} 로 정의되는 C₂
        Lambda   (float): H₁^p 노름의 상한 Λ
        kappa    (float): (K^p+1)(K^p+1+A)^{(p*-p)/p}·sup f·Λ^{p*-p}
        kappa_ok (bool) : κ < 1/2 여부
    '''
    C2: float
    Lambda: float
    kappa: float
    kappa_ok: bool

def C2_and_Lambda(n: int, p: float, h: float, K: float, A: float, mu_hat: float, k_starstar: float, sup_f: float) -> C2Result:
    '''
    # μ̂ 와 k_** 로부터 C₂ 와 Λ 를 계산하고 κ < 1/2 를 판정하는 함수

    Raises:
        DomainError: μ̂ < 0 또는 k_** ≤ 1
    '''
    _check_exponents(n, p)
    if mu_hat < 0.0:
        raise DomainError(f'μ̂ 는 0 이상이어야 합니다: {mu_hat}')
    if not k_starstar > 1.0:
        raise DomainError(f'k_** 는 1 보다 커야 합니다: {k_starstar}')

    p_star = critical_exponent(n, p)
    p_flat = flat_exponent(n, p)
    Kp = K ** p
    gap = (p_star - p) / p
    growth = (1.0 + abs(h)) * k_starstar ** (p / p_flat)

    Lambda = (p * mu_hat + sup_f * k_starstar + growth) ** (1.0 / p)
    C2 = min(
        1.0 / (2.0 * (Kp + 1.0)) * (Kp + 1.0 + A) ** -gap * (mu_hat * p + k_starstar + growth) ** -gap,
        1.0,
    )
    kappa = (Kp + 1.0) * (Kp + 1.0 + A) ** gap * sup_f * Lambda ** (p_star - p)
    return C2Result(C2=C2, Lambda=Lambda, kappa=kappa, kappa_ok=kappa < 0.5)

@dataclass(frozen=True)
class NonexistenceVerdict:
    '''
    # 에너지 ‖u‖ ≤ Λ 인 양의 해가 존재하지 않는다는 판정

    Attributes:
        L           (float): ∫a^{np/(2np+n-p)}
        R           (float): 우변 상수
        nonexistent (bool) : L > R 이면 True
    '''
    L: float
    R: float
    nonexistent: bool

    @property
    def verdict(self) -> str:
        return 'non-existence below Λ' if self.nonexistent else 'inconclusive'

def nonexistence_check(n: int, p: float, K: float, A: float, Lambda: float, a: ScalarField, f: ScalarField) -> NonexistenceVerdict:
    '''
    # L = ∫a^{np/(2np+n-p)} 와 R 을 비교하여 Λ 이하 에너지의 비존재를 판정하는 함수

    Args:
        n      (int)        : 차원
        p      (float)      : 지수
        K      (float)      : 소볼레프 최적 상수
        A      (float)      : 보정된 A
        Lambda (float)      : 에너지 상한 Λ
        a      (ScalarField): 계수 a
        f      (ScalarField): 계수 f

    Returns:
        NonexistenceVerdict: L, R, 판정
    '''
    _check_exponents(n, p)
    _check_positive('Λ', Lambda)

    p_star = critical_exponent(n, p)
    denominator = 2.0 * n * p + n - p

    L = integrate(ScalarField(a.grid, np.maximum(a.values, 0.0) ** (n * p / denominator)))
    f_minus_power = integrate(ScalarField(f.grid, np.maximum(-f.values, 0.0) ** p_star))
    R = (
        (K ** p + 1.0 + A) ** (2.0 * p * n ** 2 / (denominator * (n - p)))
        * Lambda ** (2.0 * p ** 2 * n ** 2 / (denominator * (n - p)))
        * f_minus_power ** ((n - p) / denominator)
    )
    return NonexistenceVerdict(L=L, R=R, nonexistent=L > R)

def lemma22_lower_bound(p: float, p_flat: float, h: float, inf_f: float) -> float:
    '''
    # 양의 해의 최솟값 하한 min{(h/inf f)^{1/(p♭-p)}, 1}

    Raises:
        DomainError: inf f ≥ 0 (적용 불가)
    '''
    if not inf_f < 0.0:
        raise DomainError(f'inf f 가 음수가 아니므로 최솟값 하한을 적용할 수 없습니다: {inf_f}')
    return min((h / inf_f) ** (1.0 / (p_flat - p)), 1.0)

def mu_k0_upper_bound(n: int, p: float, h: float, F_minus: float, F_plus: float) -> float:
    # -(1/p*)·min{(|h|/F)^{(2n-p)/p}, 1}·∫f⁺
    _check_exponents(n, p)
    _check_positive('∫|f⁻|', F_minus)
    if F_plus < 0.0:
        raise DomainError(f'∫f⁺ 는 0 이상이어야 합니다: {F_plus}')
    return -min((abs(h) / F_minus) ** ((2.0 * n - p) / p), 1.0) * F_plus / critical_exponent(n, p)

def sup_f_lower_bound(p: float, q: float, h: float, k: float, sup_f: float) -> float:
    # 구면 B_{k,q} 위에서 μ_{k,q} 의 하한
    return h / p * k ** (p / q) - k / q * sup_f

def unbounded_spectrum_threshold(h: float) -> float:
    # λ_f = +∞ 일 때 η₀ 판정에 쓰는 |h|
    return abs(h)

@dataclass(frozen=True)
class GateEcho:
    '''
    # 가정 판정에 사용된 모든 입력값 (판정은 이 값만으로 재현된다)
    '''
    n: int
    p: float
    h: float
    q: float
    int_a: float
    int_f: float
    sup_f: float
    inf_f: float
    F_minus: float
    F_plus: float
    lambda_f: float
    eta0: float
    K: float
    A: float
    mu_hat: Optional[float] = None
    k_starstar: Optional[float] = None
    lambda_eta0: Optional[float] = None

    def items(self) -> List[Tuple[str, float]]:
        return [(item.name, getattr(self, item.name)) for item in fields(self) if getattr(self, item.name) is not None]

@dataclass(frozen=True)
class GateClause:
    name: str
    value: float
    passed: bool
    required: bool = True

    @property
    def verdict(self) -> str:
        if self.passed:
            return 'pass'
        return f'{self.name} violated' if self.required else f'{self.name} violated (advisory)'

@dataclass(frozen=True)
class ThresholdReport:
    '''
    # 상수 값과 절별 판정을 담은 보고서

    Attributes:
        which     (str)                          : 판정한 정리 (thm1, thm2-case1, thm2-case2)
        echo      (GateEcho)                     : 입력값
        constants (Tuple[Tuple[str, float], ...]): 이름 순서가 고정된 상수 목록
        clauses   (Tuple[GateClause, ...])       : 평가 순서의 절 목록
    '''
    which: str
    echo: GateEcho
    constants: Tuple[Tuple[str, float], ...]
    clauses: Tuple[GateClause, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(clause.passed for clause in self.clauses if clause.required)

    @property
    def failures(self) -> List[str]:
        return [clause.verdict for clause in self.clauses if clause.required and not clause.passed]

    def constant(self, name: str) -> float:
        return dict(self.constants)[name]

    def rows(self) -> List[Tuple[str, float, str]]:
        '''
        # (name, value, verdict) 행 목록 (입력값, 상수, 절, 전체 판정 순)
        '''
        rows: List[Tuple[str, float, str]] = [(f'input.{name}', float(value), '') for name, value in self.echo.items()]
        rows.extend((name, value, '') for name, value in self.constants)
        rows.extend((clause.name, clause.value, clause.verdict) for clause in self.clauses)
        rows.append((f'gate.{self.which}', 1.0 if self.passed else 0.0, 'pass' if self.passed else '; '.join(self.failures)))
        return rows

    def render(self) -> str:
        return tabulate(self.rows(), headers=['name', 'value', 'verdict'], tablefmt='simple', floatfmt='.10g')

def _thm1_constants(echo: GateEcho, constants: Dict[str, float]) -> None:
    n, p, h, q = echo.n, echo.p, echo.h, echo.q
    F = echo.F_minus

    for name, evaluate in (
        ('k0', lambda: k0(p, q, h, F)),
        ('phi_q', lambda: phi_q(p, q, h, F)),
        ('condition_1_3_rhs', lambda: condition_1_3_rhs(n, p, h, F)),
        ('k1q', lambda: k1q_k2q(n, p, q, h, echo.eta0, F)[0]),
        ('k2q', lambda: k1q_k2q(n, p, q, h, echo.eta0, F)[1]),
        ('l_limit', lambda: l_limit(n, p, h, echo.eta0, F)),
        ('mu_k0_upper_bound', lambda: mu_k0_upper_bound(n, p, h, F, echo.F_plus)),
        ('C1', lambda: C1(p, h, echo.lambda_f, echo.K, echo.A, echo.eta0)),
    ):
        try:
            constants[name] = evaluate()
        except DomainError:
            continue

    if echo.lambda_eta0 is not None and math.isfinite(echo.lambda_eta0) and math.isfinite(echo.eta0):
        delta = spectral_margin(echo.lambda_eta0, h, p)
        try:
            m, Cq = m_and_Cq(p, h, delta, echo.K, echo.A, echo.eta0)
        except DomainError:
            pass
        else:
            constants.update(delta=delta, m=m, Cq=Cq)

    if echo.mu_hat is not None and echo.k_starstar is not None:
        try:
            result = C2_and_Lambda(n, p, h, echo.K, echo.A, echo.mu_hat, echo.k_starstar, echo.sup_f)
        except DomainError:
            return
        constants['C2'] = result.C2
        constants['Lambda'] = result.Lambda
        constants['kappa'] = result.kappa
        if 'C1' in constants:
            constants['C'] = min(constants['C1'], echo.eta0 * result.C2 / (abs(h) * critical_exponent(n, p)))

def evaluate_gate(echo: GateEcho, which: str) -> ThresholdReport:
    '''
    # 입력값만으로 정리의 가정을 순서대로 판정하는 순수 함수

    Args:
        echo  (GateEcho): 판정 입력값
        which (str)     : 'thm1', 'thm2-case1', 'thm2-case2'

    Returns:
        ThresholdReport: 상수와 절별 판정
    '''
    if which not in ('thm1', 'thm2-case1', 'thm2-case2'):
        raise DomainError(f'알 수 없는 판정 대상입니다: {which}')

    n, p = echo.n, echo.p
    constants: Dict[str, float] = {
        'p_star': critical_exponent(n, p),
        'p_flat': flat_exponent(n, p),
        'K': echo.K,
        'A': echo.A,
        'lambda_f': echo.lambda_f,
        'eta0': echo.eta0,
    }
    if echo.inf_f < 0.0:
        constants['lemma22_lower_bound'] = lemma22_lower_bound(p, flat_exponent(n, p), echo.h, echo.inf_f)

    clauses: List[GateClause] = []
    scale = max(abs(echo.sup_f), abs(echo.inf_f))
    spectral = GateClause('|h| < λ_f', echo.lambda_f, abs(echo.h) < echo.lambda_f)

    if which == 'thm1':
        _thm1_constants(echo, constants)
        ratio = echo.sup_f / echo.F_minus if echo.F_minus > 0.0 else math.inf

        clauses.append(GateClause('∫a > 0', echo.int_a, echo.int_a > 0.0))
        clauses.append(GateClause('∫f < 0', echo.int_f, echo.int_f < 0.0))
        clauses.append(GateClause('sup f > 0', echo.sup_f, sup_sign(echo.sup_f, scale) > 0))
        clauses.append(spectral)

        rhs = constants.get('condition_1_3_rhs')
        clauses.append(GateClause('∫a < condition_1_3_rhs', echo.int_a, rhs is not None and echo.int_a < rhs))

        scaled = echo.eta0 * echo.F_minus / critical_exponent(n, p)
        clauses.append(GateClause('|h| ≤ η₀∫|f⁻|/p*', abs(echo.h), abs(echo.h) <= scaled * (1.0 + 1e-12), required=False))

        c1 = constants.get('C1')
        clauses.append(GateClause('sup f/∫|f⁻| ≤ C1', ratio, c1 is not None and ratio <= c1))

        if 'C' in constants:
            clauses.append(GateClause('sup f/∫|f⁻| ≤ C', ratio, ratio <= constants['C']))
    else:
        if echo.int_f < 0.0:
            try:
                constants['k0_theorem2'] = k0_theorem2(p, echo.q, echo.h, echo.int_f)
            except DomainError:
                pass

        if which == 'thm2-case1':
            clauses.append(GateClause('sup f = 0', echo.sup_f, sup_sign(echo.sup_f, scale) == 0))
            clauses.append(GateClause('∫f < 0', echo.int_f, echo.int_f < 0.0))
        else:
            clauses.append(GateClause('sup f < 0', echo.sup_f, sup_sign(echo.sup_f, scale) < 0))
        clauses.append(spectral)

    return ThresholdReport(which=which, echo=echo, constants=tuple(constants.items()), clauses=tuple(clauses))

def sup_sign(sup_f: float, scale: float = 0.0) -> int:
    '''
    # sup f 의 부호 (+1, 0, -1). |sup f| ≤ 1e-12·scale 이면 0 으로 본다

    Args:
        sup_f (float): 필드의 최댓값
        scale (float): 허용 오차의 기준 크기 (보통 max|f|)
    '''
    tolerance = SUP_ZERO_TOLERANCE * abs(scale)
    if sup_f > tolerance:
        return 1
    if sup_f < -tolerance:
        return -1
    return 0

def resolve_gate(sup_f: float, which: str = 'auto', scale: float = 0.0) -> str:
    # sup f 의 부호로 판정 대상을 고른다
    if which != 'auto':
        return which
    sign = sup_sign(sup_f, scale)
    if sign > 0:
        return 'thm1'
    return 'thm2-case1' if sign == 0 else 'thm2-case2'

@dataclass(frozen=True)
class GateInputs:
    '''
    # 수치적으로 계산된 판정 입력 (λ_f, η₀, K, A 와 선택적 μ̂, k_**, λ_{f,η₀,q})
    '''
    lambda_f: float
    eta0: float
    K: float
    A: float
    mu_hat: Optional[float] = None
    k_starstar: Optional[float] = None
    lambda_eta0: Optional[float] = None

def theorem_gate(prob: ProblemData, which: str, computed: GateInputs, q: Optional[float] = None) -> ThresholdReport:
    '''
    # 격자 위의 문제 데이터로 정리의 가정을 판정하는 함수

    Args:
        prob     (ProblemData)    : 문제 데이터
        which    (str)            : 'auto', 'thm1', 'thm2-case1', 'thm2-case2'
        computed (GateInputs)     : λ_f, η₀, K, A 등 계산된 값
        q        (Optional[float]): 상수 계산에 쓸 q (기본 (p♭+p*)/2)

    Returns:
        ThresholdReport: 판정 보고서
    '''
    echo = GateEcho(
        n=prob.n,
        p=prob.p,
        h=prob.h,
        q=q if q is not None else 0.5 * (prob.p_flat + prob.p_star),
        int_a=prob.int_a,
        int_f=prob.int_f,
        sup_f=prob.sup_f,
        inf_f=prob.inf_f,
        F_minus=prob.F_minus,
        F_plus=prob.F_plus,
        lambda_f=computed.lambda_f,
        eta0=computed.eta0,
        K=computed.K,
        A=computed.A,
        mu_hat=computed.mu_hat,
        k_starstar=computed.k_starstar,
        lambda_eta0=computed.lambda_eta0,
    )
    return evaluate_gate(echo, resolve_gate(prob.sup_f, which, max(abs(prob.sup_f), abs(prob.inf_f))))

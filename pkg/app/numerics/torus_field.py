'''
# 단위 부피 평탄 토러스 [0,1)^n 위의 이산 미적분

전진 차분 기울기와 후진 차분 발산을 짝지어 사용하므로 부분 적분 공식이
반올림 오차 범위에서 정확히 성립한다.
'''
import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import DomainError, GridError

Number = Union[int, float]

DEFAULT_DELTA_REG: float = 1e-10

@dataclass(frozen=True)
class TorusGrid:
    '''
    # 주기 경계를 가진 균일 격자

    Attributes:
        n               (int): 공간 차원 (2 또는 3)
        points_per_axis (int): 축마다의 격자점 수 (4 이상)
    '''
    n: int
    points_per_axis: int

    def __post_init__(self) -> None:
        if self.n not in (2, 3):
            raise GridError(f'격자 차원은 2 또는 3이어야 합니다: n={self.n}')
        if self.points_per_axis < 4:
            raise GridError(f'축마다 격자점은 4개 이상이어야 합니다: {self.points_per_axis}')

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.n

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.n

    @property
    def spacing(self) -> float:
        return 1.0 / self.points_per_axis

    @property
    def cell_weight(self) -> float:
        return self.spacing ** self.n

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        '''
        # 셀 중심 좌표 ((i+0.5)/N)를 축별 배열로 반환하는 함수

        Returns:
            Tuple[np.ndarray, ...]: 격자 모양으로 브로드캐스트된 x1..xn 좌표
        '''
        axis = (np.arange(self.points_per_axis, dtype=np.float64) + 0.5) * self.spacing
        return tuple(np.meshgrid(*([axis] * self.n), indexing='ij'))

class ScalarField:
    '''
    # 격자점마다 실수 하나를 갖는 불변 필드

    Attributes:
        grid   (TorusGrid) : 필드가 놓인 격자
        values (np.ndarray): 읽기 전용 격자점 값 (모두 유한)
    '''
    __slots__ = ('grid', 'values')

    def __init__(self, grid: TorusGrid, values: Union[np.ndarray, Number]) -> None:
        array = np.array(np.broadcast_to(values, grid.shape), dtype=np.float64)

        if not np.all(np.isfinite(array)):
            raise DomainError('필드 값에 NaN 또는 무한대가 포함되어 있습니다.')

        array.setflags(write=False)
        self.grid = grid
        self.values = array

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> 'ScalarField':
        return cls(grid, float(value))

    def _other(self, other: Union['ScalarField', Number]) -> Union[np.ndarray, float]:
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise GridError('서로 다른 격자의 필드는 연산할 수 없습니다.')
            return other.values
        return float(other)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __abs__(self):
        return ScalarField(self.grid, np.abs(self.values))

    def __repr__(self) -> str:
        return f'ScalarField(n={self.grid.n}, N={self.grid.points_per_axis}, min={self.values.min():.6g}, max={self.values.max():.6g})'

@dataclass(frozen=True, eq=False)
class VectorField:
    '''
    # 격자점마다 n개의 전진 차분 성분을 저장하는 필드 (values.shape == (n, *grid.shape))
    '''
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n,) + self.grid.shape:
            raise GridError(f'벡터 필드의 모양이 격자와 맞지 않습니다: {self.values.shape}')

def default_delta_reg(p: float) -> float:
    # p < 2 에서만 기울기 크기를 정칙화
    return DEFAULT_DELTA_REG if p < 2.0 else 0.0

def resolve_delta_reg(p: float, delta_reg: Optional[float]) -> float:
    if delta_reg is None:
        return default_delta_reg(p)
    if delta_reg < 0.0:
        raise DomainError(f'delta_reg는 0 이상이어야 합니다: {delta_reg}')
    return float(delta_reg)

def _check_same_grid(*fields: ScalarField) -> None:
    grids = {field.grid for field in fields}
    if len(grids) != 1:
        raise GridError('필드들이 같은 격자 위에 있지 않습니다.')

def integrate(field: ScalarField) -> float:
    # np.sum은 쌍대 합산을 사용하므로 실행마다 결과가 같다
    return float(field.grid.cell_weight * np.sum(field.values))

def lp_norm(field: ScalarField, r: float) -> float:
    '''
    # L^r 노름 (∫|u|^r)^{1/r} 을 계산하는 함수

    Args:
        field (ScalarField): 대상 필드
        r     (float)      : 지수 (1 이상)

    Returns:
        float: L^r 노름
    '''
    if r < 1.0:
        raise DomainError(f'L^r 노름의 지수는 1 이상이어야 합니다: r={r}')

    total = field.grid.cell_weight * np.sum(np.abs(field.values) ** r)
    return float(total ** (1.0 / r))

def _forward_differences(values: np.ndarray, spacing: float) -> np.ndarray:
    return np.stack([(np.roll(values, -1, axis=axis) - values) / spacing for axis in range(values.ndim)])

def _backward_divergence(components: np.ndarray, spacing: float) -> np.ndarray:
    total = np.zeros(components.shape[1:], dtype=np.float64)
    for axis in range(components.shape[0]):
        total += (components[axis] - np.roll(components[axis], 1, axis=axis)) / spacing
    return total

def grad(u: ScalarField) -> VectorField:
    return VectorField(u.grid, _forward_differences(u.values, u.grid.spacing))

def divergence(w: VectorField) -> ScalarField:
    '''
    # 후진 차분 발산 (grad 의 음의 수반 연산자)
    '''
    return ScalarField(w.grid, _backward_divergence(w.values, w.grid.spacing))

def _flux_weight(squared_norm: np.ndarray, p: float, delta_reg: float) -> np.ndarray:
    if delta_reg > 0.0:
        return (squared_norm + delta_reg ** 2) ** ((p - 2.0) / 2.0)
    if p >= 2.0:
        return squared_norm ** ((p - 2.0) / 2.0)

    with np.errstate(divide='ignore'):
        weight = np.where(squared_norm > 0.0, squared_norm ** ((p - 2.0) / 2.0), 0.0)
    return weight

def _check_exponent(p: float) -> None:
    if p <= 1.0:
        raise DomainError(f'p-라플라시안은 p > 1 에서만 정의됩니다 (degenerate exponent p={p})')

def flux_values(values: np.ndarray, spacing: float, p: float, delta_reg: float) -> np.ndarray:
    '''
    # 격자점별 |∇u|_reg^{p-2} ∇u 를 배열로 계산하는 함수

    Args:
        values    (np.ndarray): 필드 값 배열
        spacing   (float)     : 격자 간격
        p         (float)     : 지수
        delta_reg (float)     : 기울기 정칙화 매개변수

    Returns:
        np.ndarray: (n, *shape) 모양의 플럭스 성분
    '''
    gradient = _forward_differences(values, spacing)
    weight = _flux_weight(np.sum(gradient ** 2, axis=0), p, delta_reg)
    return weight * gradient

def p_laplacian_values(values: np.ndarray, spacing: float, p: float, delta_reg: float) -> np.ndarray:
    return -_backward_divergence(flux_values(values, spacing, p, delta_reg), spacing)

def gradient_density_values(values: np.ndarray, spacing: float, p: float, delta_reg: float) -> np.ndarray:
    # 격자점별 |∇u|_reg^p
    squared_norm = np.sum(_forward_differences(values, spacing) ** 2, axis=0)
    if delta_reg > 0.0:
        squared_norm = squared_norm + delta_reg ** 2
    return squared_norm ** (p / 2.0)

def p_laplacian(u: ScalarField, p: float, delta_reg: Optional[float] = None) -> ScalarField:
    '''
    # 이산 p-라플라시안 Δ_p u = -div(|∇u|_reg^{p-2} ∇u) 를 계산하는 함수

    Args:
        u         (ScalarField)    : 대상 필드
        p         (float)          : 지수 (p > 1)
        delta_reg (Optional[float]): 기울기 정칙화 (None 이면 p < 2 에서 1e-10, 그 외 0)

    Returns:
        ScalarField: Δ_p u

    Raises:
        DomainError: p ≤ 1
    '''
    _check_exponent(p)
    delta = resolve_delta_reg(p, delta_reg)
    return ScalarField(u.grid, p_laplacian_values(u.values, u.grid.spacing, p, delta))

def weak_pairing(u: ScalarField, v: ScalarField, p: float, delta_reg: Optional[float] = None) -> float:
    '''
    # 약형식 쌍 ∫|∇u|_reg^{p-2}⟨∇u, ∇v⟩ 를 계산하는 함수
    '''
    _check_exponent(p)
    _check_same_grid(u, v)
    delta = resolve_delta_reg(p, delta_reg)

    flux = flux_values(u.values, u.grid.spacing, p, delta)
    gradient = _forward_differences(v.values, v.grid.spacing)
    return float(u.grid.cell_weight * np.sum(flux * gradient))

def sobolev_norm(u: ScalarField, p: float, delta_reg: Optional[float] = None) -> float:
    # H_1^p 노름 (∫|∇u|^p + ∫|u|^p)^{1/p}
    delta = resolve_delta_reg(p, delta_reg)
    density = gradient_density_values(u.values, u.grid.spacing, p, delta) + np.abs(u.values) ** p
    return float((u.grid.cell_weight * np.sum(density)) ** (1.0 / p))

def gradient_matrices(grid: TorusGrid) -> List[sp.csr_matrix]:
    '''
    # 축별 전진 차분 연산자를 희소 행렬로 조립하는 함수 (C 순서로 펼친 필드에 작용)

    Args:
        grid (TorusGrid): 대상 격자

    Returns:
        List[sp.csr_matrix]: 축마다 하나씩, (N^n, N^n) 크기의 희소 행렬
    '''
    size = grid.points_per_axis
    identity = sp.identity(size, format='csr')
    shift = sp.diags([np.ones(size - 1), np.ones(1)], [1, -(size - 1)], shape=(size, size), format='csr')
    difference = (shift - identity) / grid.spacing

    matrices = []
    for axis in range(grid.n):
        factors = [difference if index == axis else identity for index in range(grid.n)]
        operator = factors[0]
        for factor in factors[1:]:
            operator = sp.kron(operator, factor, format='csr')
        matrices.append(operator.tocsr())

    return matrices

def smooth_random_field(grid: TorusGrid, rng: np.random.Generator, max_mode: int = 2) -> ScalarField:
    '''
    # 저주파 푸리에 모드를 무작위로 합성한 주기 필드를 만드는 함수 (최대 절댓값 1)

    Args:
        grid     (TorusGrid)            : 대상 격자
        rng      (np.random.Generator)  : 시드가 고정된 난수 생성기
        max_mode (int)                  : 축마다 사용할 최대 파수

    Returns:
        ScalarField: 평균이 0에 가까운 매끄러운 필드
    '''
    coords = grid.coordinates()
    values = np.zeros(grid.shape, dtype=np.float64)

    for wave in itertools.product(range(-max_mode, max_mode + 1), repeat=grid.n):
        if not any(wave):
            continue
        amplitude = rng.standard_normal() / (1.0 + sum(m * m for m in wave))
        phase = rng.uniform(0.0, 2.0 * math.pi)
        argument = sum(m * x for m, x in zip(wave, coords))
        values += amplitude * np.cos(2.0 * math.pi * argument + phase)

    peak = float(np.max(np.abs(values)))
    return ScalarField(grid, values / peak if peak > 0.0 else values)

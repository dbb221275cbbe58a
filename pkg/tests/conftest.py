from typing import Callable

import numpy as np
import pytest
from scipy.optimize import bisect

from app.core.run_config import SolverConfig
from app.numerics.energy import ProblemData
from app.numerics.torus_field import ScalarField, TorusGrid, smooth_random_field

@pytest.fixture
def grid3() -> TorusGrid:
    return TorusGrid(3, 6)

@pytest.fixture
def grid2() -> TorusGrid:
    return TorusGrid(2, 8)

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)

@pytest.fixture
def quick_cfg() -> SolverConfig:
    return SolverConfig(max_iters=4000, eigen_starts=2, eigen_max_iters=2000, al_max_outer=15, a_probes=4, stages=3)

def random_field(grid: TorusGrid, rng: np.random.Generator, shift: float = 0.0) -> ScalarField:
    return ScalarField(grid, shift + smooth_random_field(grid, rng).values)

def constant_problem(grid: TorusGrid, p: float, h: float, f0: float, a0: float) -> ProblemData:
    return ProblemData(n=grid.n, p=p, h=h, f=ScalarField.constant(grid, f0), a=ScalarField.constant(grid, a0))

def constant_root(n: int, p: float, h: float, f0: float, a0: float) -> float:
    '''
    # h u^{p-1} = f₀ u^{p*-1} + a₀ u^{-p*-1} 의 양의 근을 이분법으로 구하는 함수
    '''
    p_star = n * p / (n - p)

    def residual(u: float) -> float:
        return h * u ** (p - 1.0) - f0 * u ** (p_star - 1.0) - a0 * u ** (-p_star - 1.0)

    lo, hi = 1e-3, 1.0
    while residual(hi) * residual(lo) > 0.0:
        hi *= 2.0
    return bisect(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

@pytest.fixture
def root() -> Callable[..., float]:
    return constant_root

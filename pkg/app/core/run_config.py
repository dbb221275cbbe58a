import configparser
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.exceptions import ConfigError

SCENARIOS: Tuple[str, ...] = ('landscape', 'eigen', 'thresholds', 'solve', 'nonexist', 'continuity')

ScenarioName = Literal['landscape', 'eigen', 'thresholds', 'solve', 'nonexist', 'continuity']
GateName = Literal['auto', 'thm1', 'thm2-case1', 'thm2-case2']
OutputFormat = Literal['csv', 'svg', 'bin', 'txt']

def _split_list(value: Any) -> Any:
    # 'a, b, c' 형태의 설정 값을 튜플로 변환
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(',') if item.strip())
    return value

class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

class ManifoldSection(_Section):
    '''
    # [manifold] 섹션: 토러스 격자 설정
    '''
    n: int = Field(ge=2, le=3)
    points_per_axis: int = Field(ge=4)

class ProblemSection(_Section):
    '''
    # [problem] 섹션: 지수와 계수 표현식
    '''
    p: float = Field(gt=1.0)
    h: float = Field(lt=0.0)
    f: str
    a: str

class SolverConfig(_Section):
    '''
    # [solver] 섹션: 허용 오차, 반복 한도, 시드, 연속법 일정 재정의

    Attributes:
        tol_grad          (float): 투영 기울기 L² 노름 허용 오차
        tol_energy        (float): 상대 에너지 감소 허용 오차
        tol_residual      (float): 약형 잔차 허용 오차
        distinct_tol      (float): 두 해의 L^q 거리 하한
        max_iters         (int)  : 구면 최소화 한 번의 최대 반복 수
        seed              (int)  : 초기 필드 난수 시드
        initial_step      (float): 첫 반복의 시험 보폭
        armijo_c          (float): Armijo 충분 감소 상수
        backtrack         (float): 역추적 축소 비율
        max_backtracks    (int)  : 반복마다 허용되는 역추적 횟수
        init_perturbation (float): 상수 초기값에 더하는 매끄러운 섭동의 크기
        delta_reg         (float): 기울기 정칙화 (비우면 p 에 따른 기본값)
        eigen_starts      (int)  : 일반화 고유값 다중 시작 수
        eigen_tol         (float): 일반화 고유값 허용 오차
        eigen_max_iters   (int)  : 고유값 내부 하강 최대 반복 수
        al_max_outer      (int)  : 증강 라그랑지안 외부 반복 수
        al_rho0           (float): 증강 라그랑지안 초기 벌점 계수
        path_nodes        (int)  : 산길 경로의 노드 수
        mp_max_iters      (int)  : 산길 알고리즘 최대 반복 수
        mp_step           (float): 산길 알고리즘 초기 보폭
        stages            (int)  : 연속법 단계 수
        eps0              (float): 첫 단계의 ε
        q_start           (float): 첫 단계의 q (비우면 (p♭+p*)/2)
        k_scan_factor     (float): k 탐색 상한 배수 (k_** = 배수·k₀)
        k_star_factor     (float): 띠 하한 배수 (k_* = 배수·k₀)
        anchor_samples    (int)  : 고정점 탐색 시 지형 표본 수
        a_probes          (int)  : 소볼레프 상수 A 보정에 쓰는 무작위 탐침 수
        eps_sob           (float): 소볼레프 부등식의 ε
    '''
    tol_grad: float = Field(default=1e-8, gt=0.0)
    tol_energy: float = Field(default=1e-12, ge=0.0)
    tol_residual: float = Field(default=1e-6, gt=0.0)
    distinct_tol: float = Field(default=1e-3, gt=0.0)
    max_iters: int = Field(default=20000, ge=1)
    seed: int = Field(default=0, ge=0)
    initial_step: float = Field(default=1e-3, gt=0.0)
    armijo_c: float = Field(default=1e-4, gt=0.0, lt=1.0)
    backtrack: float = Field(default=0.5, gt=0.0, lt=1.0)
    max_backtracks: int = Field(default=50, ge=1)
    init_perturbation: float = Field(default=0.01, ge=0.0)
    delta_reg: Optional[float] = Field(default=None, ge=0.0)
    eigen_starts: int = Field(default=5, ge=1)
    eigen_tol: float = Field(default=1e-8, gt=0.0)
    eigen_max_iters: int = Field(default=5000, ge=1)
    al_max_outer: int = Field(default=30, ge=1)
    al_rho0: float = Field(default=10.0, gt=0.0)
    path_nodes: int = Field(default=17, ge=3)
    mp_max_iters: int = Field(default=5000, ge=1)
    mp_step: float = Field(default=1e-4, gt=0.0)
    stages: int = Field(default=8, ge=1)
    eps0: float = Field(default=0.1, gt=0.0)
    q_start: Optional[float] = Field(default=None, gt=1.0)
    k_scan_factor: float = Field(default=64.0, gt=1.0)
    k_star_factor: float = Field(default=1.0 / 64.0, gt=0.0, lt=1.0)
    anchor_samples: int = Field(default=12, ge=3)
    a_probes: int = Field(default=32, ge=0)
    eps_sob: float = Field(default=1.0, gt=0.0)

class ScenarioSection(_Section):
    '''
    # [scenario] 섹션: 시나리오 이름과 시나리오별 키
    '''
    name: Optional[ScenarioName] = None
    k_min: Optional[float] = Field(default=None, gt=0.0)
    k_max: Optional[float] = Field(default=None, gt=0.0)
    k_samples: int = Field(default=20, ge=1)
    q: Optional[float] = Field(default=None, gt=1.0)
    eps: float = Field(default=1e-3, ge=0.0)
    eta_list: Tuple[float, ...] = (0.25, 0.5, 0.75, 1.0, 1.5)
    delta: Optional[float] = Field(default=None, gt=0.0)
    Lambda: Optional[float] = Field(default=None, gt=0.0)
    k: Optional[float] = Field(default=None, gt=0.0)
    rel_step: float = Field(default=1e-3, ge=0.0, lt=1.0)
    which: GateName = 'auto'
    probe_solve: bool = False

    @field_validator('eta_list', mode='before')
    @classmethod
    def split_etas(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator('eta_list')
    @classmethod
    def check_etas(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError('eta_list 는 비어 있을 수 없습니다')
        if any(eta <= 0.0 for eta in value):
            raise ValueError('eta_list 의 값은 모두 양수여야 합니다')
        if list(value) != sorted(value):
            raise ValueError('eta_list 는 오름차순이어야 합니다')
        return value

    @model_validator(mode='after')
    def check_k_range(self) -> 'ScenarioSection':
        if self.k_min is not None and self.k_max is not None and not self.k_min < self.k_max:
            raise ValueError('k_min < k_max 이어야 합니다')
        return self

class OutputSection(_Section):
    '''
    # [output] 섹션: 산출물 디렉토리와 형식
    '''
    directory: Optional[str] = None
    formats: Tuple[OutputFormat, ...] = ('csv', 'svg', 'bin', 'txt')

    @field_validator('formats', mode='before')
    @classmethod
    def split_formats(cls, value: Any) -> Any:
        return _split_list(value)

class RunConfig(_Section):
    '''
    # 한 번의 실행을 설명하는 전체 설정

    Attributes:
        manifold (ManifoldSection): 격자 설정
        problem  (ProblemSection) : 문제 설정
        solver   (SolverConfig)   : 최소화 및 연속법 설정
        scenario (ScenarioSection): 시나리오 설정
        output   (OutputSection)  : 출력 설정
    '''
    manifold: ManifoldSection
    problem: ProblemSection
    solver: SolverConfig = Field(default_factory=SolverConfig)
    scenario: ScenarioSection = Field(default_factory=ScenarioSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode='after')
    def check_exponent_range(self) -> 'RunConfig':
        if not 1.0 < self.problem.p < self.manifold.n:
            raise ValueError(f'지수는 1 < p < n 을 만족해야 합니다 (p={self.problem.p}, n={self.manifold.n})')
        return self

def _describe(error: ValidationError) -> str:
    messages = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '(root)'
        if item['type'] == 'extra_forbidden':
            messages.append(f'알 수 없는 키 {location}')
        else:
            messages.append(f'{location}: {item["msg"]}')
    return '; '.join(messages)

def parse_config_text(text: str, source: str = '<string>') -> RunConfig:
    '''
    # 설정 문자열을 해석하여 RunConfig 로 변환하는 함수

    Args:
        text   (str): [section] 머리글과 key = value 줄로 구성된 설정 문자열
        source (str): 오류 메시지에 표시할 출처 이름

    Returns:
        RunConfig: 검증된 실행 설정

    Raises:
        ConfigError: 구문 오류, 중복 키, 알 수 없는 키, 값 범위 오류
    '''
    parser = configparser.ConfigParser(
        strict=True,
        interpolation=None,
        comment_prefixes=('#',),
        inline_comment_prefixes=('#',),
        empty_lines_in_values=False,
        default_section='__defaults__',
    )
    parser.optionxform = str  # 키 대소문자 유지 (Lambda)

    try:
        parser.read_string(text, source=source)

    except configparser.DuplicateOptionError as error:
        raise ConfigError(f'[{error.section}] 섹션에 키 {error.option!r} 가 중복되었습니다', line=error.lineno)
    except configparser.DuplicateSectionError as error:
        raise ConfigError(f'섹션 [{error.section}] 가 중복되었습니다', line=error.lineno)
    except configparser.MissingSectionHeaderError as error:
        raise ConfigError('섹션 머리글 [name] 이 필요합니다', line=error.lineno)
    except configparser.ParsingError as error:
        line = error.errors[0][0] if error.errors else None
        raise ConfigError('key = value 형식이 아닌 줄이 있습니다', line=line)

    data: Dict[str, Dict[str, str]] = {name: dict(parser[name]) for name in parser.sections()}

    try:
        return RunConfig.model_validate(data)
    except ValidationError as error:
        raise ConfigError(_describe(error))

def load_config(path: Union[str, Path]) -> RunConfig:
    '''
    # 설정 파일을 읽어 RunConfig 로 변환하는 함수

    Raises:
        ConfigError: 파일을 읽을 수 없거나 내용이 잘못된 경우
    '''
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding='utf-8')
    except OSError as error:
        raise ConfigError(f'설정 파일을 읽을 수 없습니다 ({config_path}): {error}')

    return parse_config_text(text, source=str(config_path))

def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ', '.join(_format_value(item) for item in value)
    return str(value)

def dump_config(config: RunConfig) -> str:
    '''
    # RunConfig 를 다시 읽을 수 있는 설정 문자열로 출력하는 함수 (load 와 왕복 일치)
    '''
    lines = []
    for section_name in RunConfig.model_fields:
        section: BaseModel = getattr(config, section_name)
        lines.append(f'[{section_name}]')
        for key in type(section).model_fields:
            value = getattr(section, key)
            if value is None:
                continue
            lines.append(f'{key} = {_format_value(value)}')
        lines.append('')

    return '\n'.join(lines)

'''
# 계수 필드 f(x), a(x)와 초기 추정값을 닫힌 식으로 정의하는 작은 산술 표현식 언어

문법 (우선순위: ^ > 단항 부호 > * / > + -, ^ 만 오른쪽 결합):

    expression := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := ('-' | '+') unary | power
    power      := atom ('^' unary)?
    atom       := NUMBER | CONSTANT | VARIABLE | NAME '(' expression (',' expression)* ')' | '(' expression ')'
'''
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from app.core.exceptions import ExprArityError, ExprEvaluationError, ExprNameError, ExprSyntaxError
from app.core.logger import logger
from app.numerics.torus_field import ScalarField, TorusGrid

_NUMBER_REGEXP = re.compile(r'(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?')
_NAME_REGEXP = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')
_VARIABLE_REGEXP = re.compile(r'x([1-9]\d*)')
_OPERATORS = '+-*/^(),'

_CONSTANTS: Dict[str, float] = {
    'pi': math.pi,
    'e': math.e,
}

_FUNCTIONS: Dict[str, int] = {
    'sin': 1,
    'cos': 1,
    'exp': 1,
    'abs': 1,
    'sqrt': 1,
    'min': 2,
    'max': 2,
}

SEAM_TOLERANCE: float = 1e-6

class _Token(NamedTuple):
    kind: str       # 'number' | 'name' | 'op' | 'end'
    text: str
    offset: int

@dataclass(frozen=True)
class Number:
    value: float
    offset: int = field(default=0, compare=False)

@dataclass(frozen=True)
class Constant:
    name: str
    offset: int = field(default=0, compare=False)

@dataclass(frozen=True)
class Variable:
    index: int
    offset: int = field(default=0, compare=False)

@dataclass(frozen=True)
class Unary:
    op: str
    operand: 'FieldExpr'
    offset: int = field(default=0, compare=False)

@dataclass(frozen=True)
class Binary:
    op: str
    left: 'FieldExpr'
    right: 'FieldExpr'
    offset: int = field(default=0, compare=False)

@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple['FieldExpr', ...]
    offset: int = field(default=0, compare=False)

FieldExpr = Union[Number, Constant, Variable, Unary, Binary, Call]

@dataclass(frozen=True)
class GridSample:
    '''
    # 격자 위에서 평가된 표현식과 주기성 경고

    Attributes:
        field        (ScalarField)    : 셀 중심에서 평가한 값
        seam_warning (bool)           : 주기 이음매에서 값이 어긋나는지 여부
        seam_axes    (Tuple[int, ...]): 어긋남이 감지된 축 번호 (1부터 시작)
    '''
    field: ScalarField
    seam_warning: bool
    seam_axes: Tuple[int, ...] = ()

def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    position = 0

    while position < len(text):
        char = text[position]
        byte_offset = len(text[:position].encode('utf-8'))

        if char.isspace():
            position += 1
            continue

        if char in _OPERATORS:
            tokens.append(_Token('op', char, byte_offset))
            position += 1
            continue

        number = _NUMBER_REGEXP.match(text, position)
        if number:
            tokens.append(_Token('number', number.group(), byte_offset))
            position = number.end()
            continue

        name = _NAME_REGEXP.match(text, position)
        if name:
            tokens.append(_Token('name', name.group(), byte_offset))
            position = name.end()
            continue

        raise ExprSyntaxError(f'예상하지 못한 문자 {char!r}', byte_offset)

    tokens.append(_Token('end', '', len(text.encode('utf-8'))))
    return tokens

class _Parser:
    '''
    # 토큰 목록을 재귀 하강 방식으로 표현식 트리로 변환하는 클래스
    '''
    def __init__(self, text: str) -> None:
        self._tokens = _tokenize(text)
        self._index = 0

    @property
    def _current(self) -> _Token:
        return self._tokens[self._index]

    def _advance(self) -> _Token:
        token = self._current
        self._index += 1
        return token

    def _accept(self, op: str) -> bool:
        if self._current.kind == 'op' and self._current.text == op:
            self._index += 1
            return True
        return False

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            found = self._current.text or '입력의 끝'
            raise ExprSyntaxError(f'{op!r} 가 필요하지만 {found!r} 를 만났습니다', self._current.offset)

    def parse(self) -> FieldExpr:
        node = self._expression()
        if self._current.kind != 'end':
            raise ExprSyntaxError(f'해석되지 않은 토큰 {self._current.text!r}', self._current.offset)
        return node

    def _expression(self) -> FieldExpr:
        node = self._term()
        while self._current.kind == 'op' and self._current.text in '+-':
            token = self._advance()
            node = Binary(token.text, node, self._term(), token.offset)
        return node

    def _term(self) -> FieldExpr:
        node = self._unary()
        while self._current.kind == 'op' and self._current.text in '*/':
            token = self._advance()
            node = Binary(token.text, node, self._unary(), token.offset)
        return node

    def _unary(self) -> FieldExpr:
        token = self._current
        if self._accept('-'):
            return Unary('-', self._unary(), token.offset)
        if self._accept('+'):
            return self._unary()
        return self._power()

    def _power(self) -> FieldExpr:
        base = self._atom()
        token = self._current
        if self._accept('^'):
            return Binary('^', base, self._unary(), token.offset)
        return base

    def _atom(self) -> FieldExpr:
        token = self._advance()

        if token.kind == 'number':
            return Number(float(token.text), token.offset)

        if token.kind == 'op' and token.text == '(':
            node = self._expression()
            self._expect(')')
            return node

        if token.kind == 'name':
            return self._name(token)

        found = token.text or '입력의 끝'
        raise ExprSyntaxError(f'피연산자가 필요하지만 {found!r} 를 만났습니다', token.offset)

    def _name(self, token: _Token) -> FieldExpr:
        if token.text in _FUNCTIONS:
            self._expect('(')
            args = [self._expression()]
            while self._accept(','):
                args.append(self._expression())
            self._expect(')')

            arity = _FUNCTIONS[token.text]
            if len(args) != arity:
                raise ExprArityError(f'{token.text} 함수는 인자 {arity}개가 필요합니다 (받은 개수 {len(args)})', token.offset)
            return Call(token.text, tuple(args), token.offset)

        if token.text in _CONSTANTS:
            return Constant(token.text, token.offset)

        variable = _VARIABLE_REGEXP.fullmatch(token.text)
        if variable:
            return Variable(int(variable.group(1)), token.offset)

        raise ExprNameError(f'알 수 없는 식별자 {token.text!r}', token.offset)

def parse_expr(text: str) -> FieldExpr:
    '''
    # 문자열 표현식을 해석하여 표현식 트리를 반환하는 함수

    Args:
        text (str): x1..xn, pi, e, sin/cos/exp/abs/sqrt/min/max 와 + - * / ^ 로 구성된 식

    Returns:
        FieldExpr: 표현식 트리

    Raises:
        ExprSyntaxError: 구문 오류 (바이트 오프셋 포함)
        ExprNameError  : 알 수 없는 식별자
        ExprArityError : 함수 인자 개수 불일치
    '''
    return _Parser(text).parse()

def format_expr(node: FieldExpr) -> str:
    '''
    # 표현식 트리를 다시 해석 가능한 표준 문자열로 출력하는 함수
    '''
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, Constant):
        return node.name
    if isinstance(node, Variable):
        return f'x{node.index}'
    if isinstance(node, Unary):
        return f'({node.op}{format_expr(node.operand)})'
    if isinstance(node, Binary):
        return f'({format_expr(node.left)} {node.op} {format_expr(node.right)})'
    if isinstance(node, Call):
        return f'{node.name}({", ".join(format_expr(arg) for arg in node.args)})'
    raise TypeError(f'표현식 노드가 아닙니다: {node!r}')

def _apply_function(name: str, args: List[np.ndarray], offset: int) -> np.ndarray:
    if name == 'sqrt':
        if np.any(args[0] < 0.0):
            raise ExprEvaluationError(f'음수의 제곱근을 계산할 수 없습니다 (offset {offset})')
        return np.sqrt(args[0])

    functions: Dict[str, Callable[..., np.ndarray]] = {
        'sin': np.sin,
        'cos': np.cos,
        'exp': np.exp,
        'abs': np.abs,
        'min': np.minimum,
        'max': np.maximum,
    }
    return functions[name](*args)

def _evaluate(node: FieldExpr, coords: Tuple[np.ndarray, ...]) -> np.ndarray:
    if isinstance(node, Number):
        return np.asarray(node.value)

    if isinstance(node, Constant):
        return np.asarray(_CONSTANTS[node.name])

    if isinstance(node, Variable):
        if node.index > len(coords):
            raise ExprEvaluationError(f'variable beyond dimension: x{node.index} 는 {len(coords)}차원 격자에 없습니다')
        return coords[node.index - 1]

    if isinstance(node, Unary):
        return -_evaluate(node.operand, coords)

    if isinstance(node, Call):
        args = [_evaluate(arg, coords) for arg in node.args]
        return _apply_function(node.name, args, node.offset)

    left = _evaluate(node.left, coords)
    right = _evaluate(node.right, coords)

    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if node.op == '/':
        if np.any(right == 0.0):
            raise ExprEvaluationError(f'0으로 나눌 수 없습니다 (offset {node.offset})')
        return left / right

    result = np.power(left, right)
    if not np.all(np.isfinite(result)):
        raise ExprEvaluationError(f'거듭제곱의 정의역을 벗어났습니다 (offset {node.offset})')
    return result

def evaluate_values(expr: FieldExpr, grid: TorusGrid, coords: Optional[Tuple[np.ndarray, ...]] = None) -> np.ndarray:
    '''
    # 표현식을 주어진 좌표(기본값: 셀 중심)에서 배열로 평가하는 함수
    '''
    if coords is None:
        coords = grid.coordinates()

    with np.errstate(all='ignore'):
        values = np.array(np.broadcast_to(_evaluate(expr, coords), grid.shape), dtype=np.float64)

    if not np.all(np.isfinite(values)):
        raise ExprEvaluationError('표현식의 값이 유한하지 않습니다.')
    return values

def eval_on_grid(expr: FieldExpr, grid: TorusGrid) -> GridSample:
    '''
    # 표현식을 격자의 셀 중심에서 평가하고 주기 이음매를 검사하는 함수

    이음매 검사는 첫 번째 셀 층을 한 주기 옮긴 위치에서 다시 평가해
    값의 범위 대비 1e-6 이상 어긋나는 축을 경고한다. 옮긴 위치에서 정의되지 않는 축도
    이음매로 경고한다.

    Args:
        expr (FieldExpr): 표현식 트리
        grid (TorusGrid): 대상 격자

    Returns:
        GridSample: 평가된 필드와 이음매 경고
    '''
    coords = grid.coordinates()
    values = evaluate_values(expr, grid, coords)
    spread = float(np.max(values) - np.min(values))

    seam_axes: List[int] = []
    if spread > 0.0:
        for axis in range(grid.n):
            image = tuple(c + 1.0 if index == axis else c for index, c in enumerate(coords))
            try:
                shifted = evaluate_values(expr, grid, image)
            except ExprEvaluationError:
                # 한 주기 옮긴 위치에서 정의되지 않으면 이음매로 본다
                seam_axes.append(axis + 1)
                continue
            mismatch = np.max(np.abs(np.take(shifted, 0, axis=axis) - np.take(values, 0, axis=axis)))
            if mismatch > SEAM_TOLERANCE * spread:
                seam_axes.append(axis + 1)

    if seam_axes:
        logger.warning(f'표현식이 주기 경계에서 연속이 아닐 수 있습니다: {format_expr(expr)} (축 {seam_axes})')

    return GridSample(field=ScalarField(grid, values), seam_warning=bool(seam_axes), seam_axes=tuple(seam_axes))

from typing import Any, Optional

class LabError(Exception):
    '''
    # 수치 실험 패키지에서 발생하는 모든 예외의 최상위 클래스
    '''

class ConfigError(LabError):
    '''
    # 설정 파일의 구문, 키 또는 값 범위가 잘못되었을 때 발생하는 예외

    Attributes:
        line (Optional[int]): 오류가 발생한 설정 파일의 줄 번호
    '''
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        prefix = f'{line}번째 줄: ' if line is not None else ''
        super().__init__(f'{prefix}{message}')

class GridError(LabError, ValueError):
    '''
    # 격자 구성이 잘못되었거나 서로 다른 격자의 필드를 섞어 쓸 때 발생하는 예외
    '''

class DomainError(LabError, ValueError):
    '''
    # 지수, 계수 등 매개변수가 허용 범위를 벗어났을 때 발생하는 예외
    '''

class ExprSyntaxError(LabError, ValueError):
    '''
    # 필드 표현식의 구문 오류 (바이트 오프셋 포함)

    Attributes:
        offset (int): 오류 위치의 바이트 오프셋
    '''
    def __init__(self, message: str, offset: int) -> None:
        self.offset = offset
        super().__init__(f'{message} (offset {offset})')

class ExprNameError(ExprSyntaxError):
    '''
    # 알 수 없는 식별자
    '''

class ExprArityError(ExprSyntaxError):
    '''
    # 함수 인자 개수 불일치
    '''

class ExprEvaluationError(LabError, ArithmeticError):
    '''
    # 표현식을 격자 위에서 평가하는 도중 정의역을 벗어났을 때 발생하는 예외
    '''

class SingularTermError(LabError, ArithmeticError):
    '''
    # ε = 0 에서 a > 0 인 지점의 u 가 0 이 되어 특이항이 발산할 때 발생하는 예외
    '''

class InfeasibleConstraintError(LabError, ValueError):
    '''
    # 일반화 고유값 문제의 제약식을 만족하는 필드가 존재하지 않을 때 발생하는 예외
    '''

class GateFailedError(LabError):
    '''
    # 정리의 가정 검사(게이트)를 통과하지 못했을 때 발생하는 예외

    Attributes:
        report (Any): 실패한 절이 기록된 ThresholdReport
    '''
    def __init__(self, message: str, report: Any) -> None:
        self.report = report
        super().__init__(message)

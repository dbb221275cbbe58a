import os
from pathlib import Path
from typing import ClassVar, List, Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

class Config(BaseSettings):
    '''
    # 프로젝트에 사용되는 상수, 경로 및 환경 변수를 관리하는 설정 클래스

    Attributes:
        THREADS      (int) : 작업자 스레드 수의 상한 (환경 변수 LICH_THREADS)
        LOG_LEVEL    (str) : 콘솔 로그 레벨 (환경 변수 LICH_LOG_LEVEL)
        LOG_MAX_BYTE (int) : 로그 파일 하나의 최대 용량
        BACKUP_FILES (int) : 유지할 백업 로그 파일 개수
        ROOT_PATH    (Path): 프로젝트의 최상위 디렉토리 경로
        LOG_PATH     (Path): 로그 파일이 저장되는 디렉토리 경로
        DATA_PATH    (Path): 데이터를 관리하는 디렉토리 경로
        OUTPUT_PATH  (Path): 시나리오 산출물의 기본 저장 경로
        CONFIG_PATH  (Path): 데모 설정 파일이 위치한 디렉토리 경로
    '''
    model_config = SettingsConfigDict(env_prefix='LICH_', frozen=True)

    # 병렬 처리 설정
    THREADS: int = Field(default=os.cpu_count() or 1, ge=1)

    # 로그 설정
    LOG_LEVEL: Literal['DEBUG', 'INFO', 'WARNING', 'ERROR'] = 'INFO'
    LOG_MAX_BYTE: ClassVar[int] = 10 * 1024 * 1024  # 10MB
    BACKUP_FILES: ClassVar[int] = 5

    # 경로 설정
    ROOT_PATH: ClassVar[Path] = Path(__file__).parents[2]

    # 시스템 경로 설정
    LOG_PATH: ClassVar[Path] = ROOT_PATH / 'log'
    DATA_PATH: ClassVar[Path] = ROOT_PATH / 'data'

    # 산출물 경로 설정
    OUTPUT_PATH: ClassVar[Path] = DATA_PATH / 'output'
    CONFIG_PATH: ClassVar[Path] = ROOT_PATH / 'configs'

    # 디렉토리가 존재하지 않으면 생성, 존재하면 건너뛰기
    @classmethod
    def setup_directories(cls) -> None:
        directories: List[Path] = [cls.LOG_PATH, cls.DATA_PATH, cls.OUTPUT_PATH]

        for directory in directories:
            directory.mkdir(parents=True, exist_ok=True)

# 전역 설정 객체 생성 및 디렉토리 초기화
settings = Config()
settings.setup_directories()

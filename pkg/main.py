import sys
import argparse
from typing import List, Optional

from app.core.exceptions import ConfigError
from app.core.logger import logger
from app.core.run_config import SCENARIOS
from app.orchestrator import EXIT_CONFIG_ERROR, Orchestrator

def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    '''
    # 명령줄에서 인자를 파싱하는 함수

    Returns:
        argparse.Namespace: 명령줄에서 파싱된 인자 객체
    '''
    parser = argparse.ArgumentParser(
        prog='lich',
        description='토러스 위의 p-라플라시안 Lichnerowicz 방정식 수치 실험'
    )
    parser.add_argument(
        'scenario',
        choices=SCENARIOS,
        help='실행할 시나리오'
    )
    parser.add_argument(
        '--config',
        type=str,
        required=True,
        help='실행 설정 파일의 경로'
    )
    parser.add_argument(
        '--out',
        type=str,
        default=None,
        help='산출물을 저장할 디렉토리 (기본값: [output] directory 또는 data/output/<scenario>)'
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='[solver] seed 를 덮어쓸 난수 시드'
    )
    return parser.parse_args(argv)

def main(argv: Optional[List[str]] = None) -> int:
    '''
    # 시나리오 실행 및 명령줄 인자 파서 실행 함수

    Returns:
        int: 종료 코드 (0 성공, 1 알 수 없는 오류, 2 가정 판정 실패, 3 수렴 실패, 4 설정 오류)
    '''
    args = parse_args(argv)

    try:
        orchestrator = Orchestrator.from_path(args.config, scenario=args.scenario, out_dir=args.out, seed=args.seed)
        return orchestrator.execute()

    except ConfigError as error:
        logger.error(f'설정 오류: {error}')
        return EXIT_CONFIG_ERROR

    except Exception as error:
        logger.critical(f'프로그램 실행 중 알 수 없는 오류가 발생했습니다: {error}')
        return 1

if __name__ == '__main__':
    sys.exit(main())

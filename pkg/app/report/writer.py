import csv
import html
import math
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from app.core.logger import logger
from app.numerics.torus_field import ScalarField

FLOAT_FORMAT: str = '.17g'

# SVG 그림 크기와 여백 (픽셀)
_WIDTH: int = 640
_HEIGHT: int = 400
_MARGIN: int = 56

def format_number(value: Any) -> str:
    '''
    # CSV 칸에 들어갈 값을 문자열로 변환하는 함수 (실수는 유효숫자 17자리)
    '''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if value is None:
        return ''
    return str(value)

class ReportWriter:
    '''
    # 시나리오 산출물 (CSV, SVG, 이진 필드, 텍스트) 을 한 디렉토리에 기록하는 클래스

    Attributes:
        out_dir (Path)           : 산출물 디렉토리
        formats (Tuple[str, ...]): 기록할 형식 ('csv', 'svg', 'bin', 'txt')
        written (List[Path])     : 이번 실행에서 기록한 파일 목록
    '''
    def __init__(self, out_dir: Path, formats: Sequence[str] = ('csv', 'svg', 'bin', 'txt')) -> None:
        self.out_dir = Path(out_dir)
        self.formats = tuple(formats)
        self.written: List[Path] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _target(self, name: str, fmt: str) -> Optional[Path]:
        if fmt not in self.formats:
            return None
        return self.out_dir / name

    def _write_text(self, path: Path, text: str) -> Path:
        try:
            with open(path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
        except OSError as error:
            logger.error(f'산출물을 기록하지 못했습니다 ({path}): {error}')
            raise

        self.written.append(path)
        logger.info(f'산출물을 기록했습니다: {path}')
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Optional[Path]:
        '''
        # 머리글과 행 목록을 CSV 로 기록하는 함수 ('.' 소수점, LF 줄바꿈)

        Args:
            name   (str)                     : 파일 이름 (예: landscape.csv)
            header (Sequence[str])           : 열 이름
            rows   (Sequence[Sequence[Any]]) : 행 목록

        Returns:
            Optional[Path]: 기록한 경로 (csv 형식이 꺼져 있으면 None)
        '''
        path = self._target(name, 'csv')
        if path is None:
            return None

        try:
            with open(path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(header)
                for row in rows:
                    writer.writerow([format_number(value) for value in row])
        except OSError as error:
            logger.error(f'CSV 를 기록하지 못했습니다 ({path}): {error}')
            raise

        self.written.append(path)
        logger.info(f'CSV 를 기록했습니다: {path} ({len(rows)}행)')
        return path

    def write_svg(self, name: str, xs: Sequence[float], ys: Sequence[float], title: str, x_label: str, y_label: str) -> Optional[Path]:
        '''
        # (x, y) 점들을 축과 0 기준선이 있는 꺾은선 그래프로 기록하는 함수
        '''
        path = self._target(name, 'svg')
        if path is None:
            return None

        points = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        return self._write_text(path, render_polyline_svg(points, title, x_label, y_label))

    def write_field(self, name: str, field: ScalarField) -> Optional[Path]:
        '''
        # 필드를 리틀 엔디언 float64 배열 (.bin) 과 텍스트 머리글 (.hdr) 로 기록하는 함수

        Args:
            name  (str)        : 확장자를 뺀 파일 이름
            field (ScalarField): 기록할 필드

        Returns:
            Optional[Path]: .bin 파일 경로 (bin 형식이 꺼져 있으면 None)
        '''
        path = self._target(f'{name}.bin', 'bin')
        if path is None:
            return None

        grid = field.grid
        try:
            np.ascontiguousarray(field.values, dtype='<f8').tofile(path)
        except OSError as error:
            logger.error(f'필드를 기록하지 못했습니다 ({path}): {error}')
            raise
        self.written.append(path)

        header = '\n'.join([
            f'n = {grid.n}',
            f'points_per_axis = {grid.points_per_axis}',
            f'spacing = {format_number(grid.spacing)}',
            'byte_order = little',
            'dtype = float64',
            'layout = C',
            '',
        ])
        self._write_text(self.out_dir / f'{name}.hdr', header)
        return path

    def write_txt(self, name: str, text: str) -> Optional[Path]:
        path = self._target(name, 'txt')
        if path is None:
            return None
        return self._write_text(path, text if text.endswith('\n') else text + '\n')

def _ticks(low: float, high: float, count: int = 5) -> List[float]:
    if high == low:
        return [low]
    return [low + (high - low) * index / (count - 1) for index in range(count)]

def render_polyline_svg(points: Sequence[Tuple[float, float]], title: str, x_label: str, y_label: str) -> str:
    '''
    # 점 목록을 외부 의존성 없는 SVG 문서 문자열로 그리는 함수
    '''
    if points:
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        x_low, x_high = min(xs), max(xs)
        y_low, y_high = min(min(ys), 0.0), max(max(ys), 0.0)
    else:
        x_low, x_high, y_low, y_high = 0.0, 1.0, 0.0, 1.0

    x_span = x_high - x_low or 1.0
    y_span = y_high - y_low or 1.0
    plot_width = _WIDTH - 2 * _MARGIN
    plot_height = _HEIGHT - 2 * _MARGIN

    def to_x(x: float) -> float:
        return _MARGIN + (x - x_low) / x_span * plot_width

    def to_y(y: float) -> float:
        return _HEIGHT - _MARGIN - (y - y_low) / y_span * plot_height

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<title>{html.escape(title)}</title>',
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="{_MARGIN / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="14">{html.escape(title)}</text>',
        # 축
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{to_y(0.0):.2f}" x2="{_WIDTH - _MARGIN}" y2="{to_y(0.0):.2f}" stroke="#999" stroke-dasharray="4 3"/>',
    ]

    for tick in _ticks(x_low, x_high):
        lines.append(f'<text x="{to_x(tick):.2f}" y="{_HEIGHT - _MARGIN + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{tick:.4g}</text>')
    for tick in _ticks(y_low, y_high):
        lines.append(f'<text x="{_MARGIN - 6}" y="{to_y(tick):.2f}" text-anchor="end" font-family="sans-serif" font-size="10">{tick:.4g}</text>')

    lines.append(f'<text x="{_WIDTH / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{html.escape(x_label)}</text>')
    lines.append(f'<text x="14" y="{_HEIGHT / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {_HEIGHT / 2:.1f})">{html.escape(y_label)}</text>')

    if points:
        coordinates = ' '.join(f'{to_x(x):.2f},{to_y(y):.2f}' for x, y in points)
        lines.append(f'<polyline points="{coordinates}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>')
        for x, y in points:
            lines.append(f'<circle cx="{to_x(x):.2f}" cy="{to_y(y):.2f}" r="2.5" fill="#1f5fa8"/>')

    lines.append('</svg>')
    return '\n'.join(lines) + '\n'

# 토러스 격자 위의 수치 해석 모듈

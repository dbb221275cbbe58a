# 시나리오 산출물 기록

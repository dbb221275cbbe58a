# /app
# /app/core
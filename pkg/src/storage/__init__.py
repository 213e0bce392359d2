# Storage — insert-only expansion cache

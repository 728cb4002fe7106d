"""Utility functions."""
import hashlib
from datetime import datetime, timezone



def utc_now_naive():
    """Наивное UTC время для БД."""
    return datetime.now(timezone.utc).replace(tzinfo=None)


# Алиас для использования в моделях
get_db_time = utc_now_naive


def fingerprint(payload: str) -> str:
    """SHA-256 канонического JSON конфигурации."""
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()

"""Database configuration and session management."""
import logging
import os
from contextlib import contextmanager
from typing import Generator, Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

logger = logging.getLogger(__name__)

# Настройки подключения
DEFAULT_DATABASE_URL = "sqlite:///topspace.db"
SQLALCHEMY_DATABASE_URL = os.environ.get("TOPSPACE_DB_URL", DEFAULT_DATABASE_URL)


def _make_engine(url: str):
    return create_engine(
        url,
        connect_args={"check_same_thread": False} if url.startswith("sqlite") else {}
    )


engine = _make_engine(SQLALCHEMY_DATABASE_URL)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def configure(url: str):
    """Перепривязка engine и SessionLocal к другому URL (--db, тесты)."""
    global engine
    engine = _make_engine(url)
    SessionLocal.configure(bind=engine)
    logger.debug(f"База данных: {url}")
    return engine


def init_database(drop_all: bool = False, url: Optional[str] = None):
    """Инициализация базы данных"""
    from . import models  # noqa: F401  регистрация таблиц в Base.metadata

    if url is not None:
        configure(url)

    if drop_all:
        logger.warning("Удаление всех таблиц!")
        Base.metadata.drop_all(bind=engine)

    logger.debug("Создание таблиц...")
    Base.metadata.create_all(bind=engine)
    return engine



@contextmanager
def session_scope() -> Generator[Session, None, None]:
    """Контекстный менеджер для автоматического закрытия сессии"""
    session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Ошибка при работе с БД: {e}")
        raise
    finally:
        session.close()

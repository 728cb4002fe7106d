# topspace/logger_config.py
import logging
import os
from logging.handlers import RotatingFileHandler


def setup_logger(name='topspace', log_dir='logs', console_level=logging.INFO):
    """
    Настройка логгера с ротацией файлов.

    Повторный вызов не добавляет хендлеры второй раз.
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    if getattr(logger, '_topspace_configured', False):
        return logger

    # Создаем директорию для логов, если её нет
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # Формат логов
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Хендлер для файла с ротацией
    log_file = os.path.join(log_dir, f'{name}.log')
    file_handler = RotatingFileHandler(
        log_file, maxBytes=5 * 1024 * 1024, backupCount=10, encoding='utf-8'
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)

    # Хендлер для консоли
    console_handler = logging.StreamHandler()
    console_handler.setLevel(console_level)
    console_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    logger._topspace_configured = True

    return logger

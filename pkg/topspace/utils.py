import math
import re

import numpy as np


class TokenNormalizer:
    """
    Класс для нормализации лемм, меток и сидов
    """

    LABEL_ALIASES = {
        'i': 'I', 'idiom': 'I', 'idiomatic': 'I',
        'l': 'L', 'literal': 'L',
        'q': 'Q', 'unknown': 'Q', '?': 'Q',
    }

    @staticmethod
    def normalize_token(token):
        """
        Приводит лемму к нижнему регистру и убирает пробелы
        """
        if not isinstance(token, str):
            return None
        cleaned = token.strip().lower()
        return cleaned or None

    @staticmethod
    def normalize_label(label):
        """
        Приводит метку к одному из кодов I / L / Q
        """
        if not label or not isinstance(label, str):
            return None
        return TokenNormalizer.LABEL_ALIASES.get(label.strip().lower())

    @staticmethod
    def normalize_expression(expression):
        """
        'Blow the  Whistle' -> 'blow_the_whistle'
        """
        if not expression or not isinstance(expression, str):
            return None
        parts = [p for p in re.split(r'[\s_]+', expression.strip().lower()) if p]
        return '_'.join(parts) or None

    @staticmethod
    def derived_seed(seed, index):
        """
        Детерминированный сид для документа/прогона, смешанный с индексом
        """
        seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
        return int(seq.generate_state(1, dtype=np.uint64)[0])

    @staticmethod
    def run_seed(seed, run_index):
        """Сид прогона: seed XOR run_index."""
        return (int(seed) ^ int(run_index)) & 0xFFFFFFFFFFFFFFFF

    @staticmethod
    def knn_neighbors(n_train):
        """k = ceil(n/5), но не меньше 1."""
        return max(1, math.ceil(n_train / 5))

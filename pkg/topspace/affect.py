"""Arousal norms and centered arousal matrices (Θ = M + A)."""
# topspace/affect.py
import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from .errors import AffectUnavailableError, AlignmentError, LexiconFormatError
from .representation import TermDocMatrix
from .utils import TokenNormalizer

logger = logging.getLogger(__name__)


class ArousalMode(str, Enum):
    INDICATOR = 'indicator'   # вхождение терма x центрированное возбуждение
    SCALED = 'scaled'         # tf x центрированное возбуждение


class AffectNorm(NamedTuple):
    valence: float
    arousal: float
    dominance: float


@dataclass(frozen=True)
class LexiconColumns:
    word: str = 'Word'
    valence: str = 'V.Mean.Sum'
    arousal: str = 'A.Mean.Sum'
    dominance: str = 'D.Mean.Sum'


@dataclass(frozen=True)
class AffectLexicon:
    entries: Dict[str, AffectNorm]
    duplicates: int = 0

    def __len__(self):
        return len(self.entries)

    def __contains__(self, lemma):
        return lemma in self.entries

    def arousal(self, lemma) -> Optional[float]:
        norm = self.entries.get(lemma)
        return None if norm is None else norm.arousal


@dataclass(frozen=True)
class ArousalContext:
    """Среднее возбуждение m_A считается один раз на обучении и используется и для запросов."""
    mean: float
    lexicon: AffectLexicon


def _sniff_delimiter(header: str) -> str:
    try:
        return csv.Sniffer().sniff(header, delimiters=',\t').delimiter
    except csv.Error:
        return '\t' if '\t' in header else ','


def _optional_float(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return math.nan


def load_lexicon(path, column_map: Optional[LexiconColumns] = None) -> AffectLexicon:
    """
    Загружает нормы (разделитель ',' или табуляция, заголовок обязателен).
    Повторная лемма: побеждает последняя строка.
    """
    columns = column_map or LexiconColumns()
    path = Path(path)

    with path.open('r', encoding='utf-8', newline='') as f:
        header = f.readline()
        if not header.strip():
            raise LexiconFormatError("missing header row", 1)
        delimiter = _sniff_delimiter(header)
        names = next(csv.reader([header], delimiter=delimiter))
        names = [n.strip() for n in names]

        missing = [c for c in (columns.word, columns.valence, columns.arousal, columns.dominance)
                   if c not in names]
        if missing:
            raise LexiconFormatError(f"missing columns {missing} (header: {names})", 1)
        word_i, val_i, aro_i, dom_i = (names.index(c) for c in
                                       (columns.word, columns.valence, columns.arousal, columns.dominance))

        entries: Dict[str, AffectNorm] = {}
        duplicates = 0
        for line_number, row in enumerate(csv.reader(f, delimiter=delimiter), start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) <= max(word_i, val_i, aro_i, dom_i):
                raise LexiconFormatError(f"expected {len(names)} fields, got {len(row)}", line_number)

            lemma = TokenNormalizer.normalize_token(row[word_i])
            if lemma is None:
                raise LexiconFormatError("empty word", line_number)
            try:
                arousal = float(row[aro_i])
            except ValueError as e:
                raise LexiconFormatError(f"non-numeric arousal {row[aro_i]!r}", line_number) from e
            if not math.isfinite(arousal):
                raise LexiconFormatError(f"non-finite arousal {row[aro_i]!r}", line_number)

            if lemma in entries:
                duplicates += 1
            entries[lemma] = AffectNorm(_optional_float(row[val_i]), arousal, _optional_float(row[dom_i]))

    if duplicates:
        logger.warning(f"⚠️ Лексикон {path.name}: {duplicates} повторных лемм (оставлены последние)")
    logger.info(f"Лексикон {path.name}: {len(entries)} лемм")
    return AffectLexicon(entries, duplicates)


def write_lexicon(lexicon: AffectLexicon, path, columns: Optional[LexiconColumns] = None) -> None:
    columns = columns or LexiconColumns()
    with Path(path).open('w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow([columns.word, columns.valence, columns.arousal, columns.dominance])
        for lemma in sorted(lexicon.entries):
            norm = lexicon.entries[lemma]
            writer.writerow([lemma, repr(norm.valence), repr(norm.arousal), repr(norm.dominance)])


def training_mean(train_docs: Sequence[Sequence[str]], lexicon: AffectLexicon) -> float:
    """Среднее возбуждение по всем вхождениям (с повторами) лемм из лексикона."""
    values = [lexicon.entries[t].arousal for doc in train_docs for t in doc if t in lexicon.entries]
    if not values:
        raise AffectUnavailableError("No training token is covered by the affect lexicon")
    return float(np.mean(values))


def document_arousal(doc: Sequence[str], ctx: ArousalContext) -> float:
    """Среднее центрированное возбуждение документа; 0 если нет лемм из лексикона."""
    values = [ctx.lexicon.entries[t].arousal - ctx.mean for t in doc if t in ctx.lexicon.entries]
    return float(np.mean(values)) if values else 0.0


def arousal_matrix(base: TermDocMatrix, ctx: ArousalContext,
                   mode: ArousalMode = ArousalMode.INDICATOR) -> TermDocMatrix:
    """
    A[i][j] = arousal(term_i) - m_A, если терм встречается в документе j (tf > 0)
    и есть в лексиконе. Термы с idf = 0 тоже получают значение.
    """
    centered = np.zeros(len(base.vocab), dtype=float)
    for i, term in enumerate(base.vocab.terms):
        arousal = ctx.lexicon.arousal(term)
        if arousal is not None:
            centered[i] = arousal - ctx.mean

    occurs = base.counts > 0
    values = np.where(occurs, centered[:, np.newaxis], 0.0)
    if ArousalMode(mode) is ArousalMode.SCALED:
        values = values * base.counts
    return base.with_entries(values)


def add_affect(matrix: TermDocMatrix, arousal: TermDocMatrix) -> TermDocMatrix:
    if matrix.shape != arousal.shape:
        raise AlignmentError(f"Shape mismatch: {matrix.shape} vs {arousal.shape}")
    if matrix.vocab.terms != arousal.vocab.terms:
        raise AlignmentError("Vocabulary mismatch between term and arousal matrices")
    if matrix.doc_ids != arousal.doc_ids:
        raise AlignmentError("Document order mismatch between term and arousal matrices")
    return matrix.with_entries(matrix.entries + arousal.entries)

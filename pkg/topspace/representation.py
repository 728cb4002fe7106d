"""Vocabularies and weighted term-by-document matrices."""
# topspace/representation.py
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from sklearn.feature_extraction.text import CountVectorizer

from .errors import EmptyVocabularyError

logger = logging.getLogger(__name__)


class LocalWeight(str, Enum):
    RAW = 'raw'
    LOG = 'log'


@dataclass(frozen=True)
class Vocabulary:
    """Отсортированный словарь лемм: term <-> позиция."""
    terms: Tuple[str, ...]
    index: Dict[str, int] = field(repr=False, compare=False)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> 'Vocabulary':
        ordered = tuple(sorted(set(terms)))
        return cls(ordered, {t: i for i, t in enumerate(ordered)})

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def __iter__(self):
        return iter(self.terms)

    def restrict(self, tokens: Iterable[str]):
        """Оставляет только токены из словаря, порядок сохраняется."""
        return [t for t in tokens if t in self.index]

    def union(self, other: 'Vocabulary') -> 'Vocabulary':
        return Vocabulary.from_terms(self.terms + other.terms)


@dataclass(frozen=True)
class TermDocMatrix:
    vocab: Vocabulary
    entries: np.ndarray          # |V| x n_docs
    counts: np.ndarray           # сырые tf, та же форма
    global_weights: np.ndarray   # idf по термам
    doc_ids: Tuple[str, ...]

    def __post_init__(self):
        for array in (self.entries, self.counts, self.global_weights):
            array.setflags(write=False)

    @property
    def n_docs(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def with_entries(self, entries: np.ndarray) -> 'TermDocMatrix':
        return TermDocMatrix(self.vocab, np.array(entries, dtype=float), self.counts.copy(),
                             self.global_weights.copy(), self.doc_ids)


def build_vocabulary(docs: Sequence[Sequence[str]]) -> Vocabulary:
    terms = set()
    for doc in docs:
        terms.update(doc)
    if not terms:
        raise EmptyVocabularyError("All documents are empty, vocabulary cannot be built")
    return Vocabulary.from_terms(terms)


def count_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> np.ndarray:
    """Сырые частоты |V| x n_docs; токены вне словаря игнорируются."""
    if len(docs) == 0 or len(vocab) == 0:
        return np.zeros((len(vocab), len(docs)), dtype=float)
    vectorizer = CountVectorizer(analyzer=_identity, vocabulary=vocab.index)
    counts = vectorizer.transform([list(doc) for doc in docs])
    return np.asarray(counts.toarray().T, dtype=float)


def _identity(doc):
    return doc


def idf_weights(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> np.ndarray:
    """idf(t) = ln(n_docs / df(t)); термы с df = 0 получают вес 0."""
    n_docs = len(docs)
    df = (count_matrix(docs, vocab) > 0).sum(axis=1)
    weights = np.zeros(len(vocab), dtype=float)
    present = df > 0
    weights[present] = np.log(n_docs / df[present])
    return weights


def _local_weight(counts: np.ndarray, scheme: LocalWeight) -> np.ndarray:
    if LocalWeight(scheme) is LocalWeight.LOG:
        weighted = np.zeros_like(counts)
        nonzero = counts > 0
        weighted[nonzero] = 1.0 + np.log(counts[nonzero])
        return weighted
    return counts


def term_doc_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary, global_weights,
                    doc_ids: Optional[Sequence[str]] = None,
                    local_weight: LocalWeight = LocalWeight.RAW) -> TermDocMatrix:
    global_weights = np.asarray(global_weights, dtype=float)
    if global_weights.shape != (len(vocab),):
        raise ValueError(
            f"global weights of length {global_weights.shape} do not match vocabulary of {len(vocab)}"
        )
    if doc_ids is None:
        doc_ids = [str(j) for j in range(len(docs))]
    counts = count_matrix(docs, vocab)
    entries = _local_weight(counts, local_weight) * global_weights[:, np.newaxis]
    return TermDocMatrix(vocab, entries, counts, global_weights.copy(), tuple(doc_ids))


def query_matrix(query_docs: Sequence[Sequence[str]], train_vocab: Vocabulary, train_weights,
                 doc_ids: Optional[Sequence[str]] = None,
                 local_weight: LocalWeight = LocalWeight.RAW) -> TermDocMatrix:
    """
    Матрица запросов в словаре DicT с весами idf обучающей выборки.
    Запросы не проходят через LDA; запрос без общих термов даёт нулевой столбец.
    """
    matrix = term_doc_matrix(query_docs, train_vocab, train_weights, doc_ids, local_weight)
    empty = int((matrix.counts.sum(axis=0) == 0).sum()) if matrix.n_docs else 0
    if empty:
        logger.debug(f"Запросов без общих термов со словарём: {empty} из {matrix.n_docs}")
    return matrix


def dump_matrix(matrix: TermDocMatrix, path) -> None:
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='\n') as f:
        f.write(','.join(['term', *matrix.doc_ids]) + '\n')
        for i, term in enumerate(matrix.vocab.terms):
            values = ','.join(f"{v:.6f}" for v in matrix.entries[i])
            f.write(f"{term},{values}\n" if values else f"{term}\n")


def save_vocabulary(vocab: Vocabulary, weights, path) -> None:
    """Sidecar name.vocab: 'term,idf' на строку (полная точность)."""
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='\n') as f:
        for term, weight in zip(vocab.terms, np.asarray(weights, dtype=float)):
            f.write(f"{term},{float(weight)!r}\n")


def load_vocabulary(path) -> Tuple[Vocabulary, np.ndarray]:
    terms, weights = [], []
    with Path(path).open('r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip('\n')
            if not line:
                continue
            term, _, weight = line.rpartition(',')
            if not term:
                raise ValueError(f"{path}: line {line_number} is not 'term,idf'")
            terms.append(term)
            weights.append(float(weight))
    vocab = Vocabulary.from_terms(terms)
    if list(vocab.terms) != terms:
        order = [terms.index(t) for t in vocab.terms]
        weights = [weights[i] for i in order]
    return vocab, np.asarray(weights, dtype=float)

"""
Per-document topic extraction with collapsed Gibbs LDA over a restricted vocabulary.
"""
# topspace/topics.py
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .corpus import ContextMode
from .errors import EmptyDocumentError
from .representation import Vocabulary

logger = logging.getLogger(__name__)


class VocabularyMode(str, Enum):
    RESTRICTED = 'restricted'   # DicI для идиом, DicL для литералов
    ENLARGED = 'enlarged'       # DicI ∪ DicL для обоих классов


class QueryMode(str, Enum):
    TEXT = 'text'
    TOPICS = 'topics'


class TopicSource(str, Enum):
    DOCUMENT = 'document'       # LDA на каждом документе отдельно
    COLLECTION = 'collection'   # одна модель на класс, m самых вероятных тем документа


def default_num_topics(mode: ContextMode) -> int:
    """2 темы для одного абзаца, 4 для трёх."""
    return 4 if ContextMode(mode) is ContextMode.MULTI else 2


class LdaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_topics: int = Field(2, ge=1)
    terms_per_topic: int = Field(10, ge=1)
    alpha: Optional[float] = Field(None, gt=0)
    beta: float = Field(0.1, gt=0)
    iterations: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    # число тем в модели коллекции (TopicSource.COLLECTION)
    collection_topics: int = Field(10, ge=1)

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.num_topics

    def with_seed(self, seed: int) -> 'LdaConfig':
        return self.model_copy(update={'seed': int(seed)})


class SweepCounts(NamedTuple):
    iteration: int
    doc_topic: np.ndarray
    topic_word: np.ndarray
    topic_totals: np.ndarray
    assignments: np.ndarray


@dataclass(frozen=True)
class LdaModel:
    phi: np.ndarray                      # m x |V|
    theta: np.ndarray                    # n_docs x m
    vocab: Vocabulary
    assignments: Tuple[np.ndarray, ...]  # метки тем по документам
    config: LdaConfig

    @property
    def num_topics(self) -> int:
        return self.phi.shape[0]


@dataclass(frozen=True)
class TopicSet:
    topics: Tuple[Tuple[Tuple[str, float], ...], ...]

    def __len__(self):
        return len(self.topics)

    def terms(self) -> List[List[str]]:
        return [[term for term, _ in topic] for topic in self.topics]


def fit_lda_collection(docs: Sequence[Sequence[str]], vocab: Vocabulary, config: LdaConfig,
                       on_sweep: Optional[Callable[[SweepCounts], None]] = None) -> LdaModel:
    """
    Коллапсированный сэмплер Гиббса по нескольким документам.

    Токены вне словаря отбрасываются заранее; phi считается по финальным
    счётчикам со сглаживанием beta.
    """
    restricted = [[vocab.index[t] for t in doc if t in vocab.index] for doc in docs]
    if not restricted:
        raise EmptyDocumentError("No documents to fit")
    for position, doc in enumerate(restricted):
        if not doc:
            raise EmptyDocumentError(f"Document {position} is empty after vocabulary restriction")

    m = config.num_topics
    n_words = len(vocab)
    alpha = config.effective_alpha
    beta = config.beta
    v_beta = n_words * beta

    rng = np.random.default_rng(config.seed)
    lengths = np.array([len(doc) for doc in restricted])
    words = np.concatenate([np.asarray(doc, dtype=np.int64) for doc in restricted])
    doc_of = np.repeat(np.arange(len(restricted)), lengths)
    z = rng.integers(m, size=words.shape[0])

    word_list = words.tolist()
    doc_list = doc_of.tolist()
    z_list = z.tolist()

    # счётчики держим в списках, в numpy переводим только на выходе
    n_dt = [[0] * m for _ in restricted]
    n_wt = [[0] * m for _ in range(n_words)]
    n_t = [0] * m
    for d, w, t in zip(doc_list, word_list, z_list):
        n_dt[d][t] += 1
        n_wt[w][t] += 1
        n_t[t] += 1

    last = m - 1
    cumulative = [0.0] * m
    for iteration in range(config.iterations):
        uniforms = rng.random(len(word_list)).tolist()
        for i, w in enumerate(word_list):
            doc_counts = n_dt[doc_list[i]]
            word_counts = n_wt[w]
            t = z_list[i]
            doc_counts[t] -= 1
            word_counts[t] -= 1
            n_t[t] -= 1

            total = 0.0
            for k in range(m):
                total += (doc_counts[k] + alpha) * (word_counts[k] + beta) / (n_t[k] + v_beta)
                cumulative[k] = total
            u = uniforms[i] * total
            t = 0
            while t < last and cumulative[t] <= u:
                t += 1

            z_list[i] = t
            doc_counts[t] += 1
            word_counts[t] += 1
            n_t[t] += 1

        if on_sweep is not None:
            on_sweep(SweepCounts(iteration, np.array(n_dt, dtype=np.int64),
                                 np.array(n_wt, dtype=np.int64).T.copy(),
                                 np.array(n_t, dtype=np.int64), np.asarray(z_list)))

    doc_topic = np.array(n_dt, dtype=np.int64)
    topic_word = np.array(n_wt, dtype=np.int64).reshape(n_words, m).T
    topic_totals = np.array(n_t, dtype=np.int64)
    phi = (topic_word + beta) / (topic_totals[:, np.newaxis] + v_beta)
    theta = (doc_topic + alpha) / (lengths[:, np.newaxis] + m * alpha)

    z_final = np.asarray(z_list, dtype=np.int64)
    bounds = np.cumsum(lengths)[:-1]
    assignments = tuple(np.split(z_final, bounds))
    for array in (phi, theta, *assignments):
        array.setflags(write=False)

    logger.debug(
        f"LDA: {len(restricted)} док., {words.shape[0]} токенов, |V|={n_words}, "
        f"m={m}, {config.iterations} итераций"
    )
    return LdaModel(phi=phi, theta=theta, vocab=vocab, assignments=assignments, config=config)


def fit_lda(doc: Sequence[str], vocab: Vocabulary, config: LdaConfig,
            on_sweep: Optional[Callable[[SweepCounts], None]] = None) -> LdaModel:
    return fit_lda_collection([doc], vocab, config, on_sweep)


def _ranked(values: np.ndarray) -> np.ndarray:
    """Индексы по убыванию значения, при равенстве по возрастанию индекса."""
    return np.lexsort((np.arange(values.shape[0]), -values))


def _topic_terms(model: LdaModel, topic: int, k: int) -> Tuple[Tuple[str, float], ...]:
    row = model.phi[topic]
    order = _ranked(row)[:k]
    return tuple((model.vocab.terms[w], float(row[w])) for w in order)


def extract_topics(model: LdaModel, k: int) -> TopicSet:
    if k < 1:
        raise ValueError("k must be >= 1")
    return TopicSet(tuple(_topic_terms(model, t, k) for t in range(model.num_topics)))


def document_topics(model: LdaModel, doc_index: int, m: int, k: int) -> TopicSet:
    """m самых вероятных тем документа в модели коллекции, по k термов в каждой."""
    order = _ranked(model.theta[doc_index])[:m]
    return TopicSet(tuple(_topic_terms(model, int(t), k) for t in order))


def topic_document(topics: TopicSet) -> List[str]:
    """d̂: конкатенация термов всех тем (мультимножество)."""
    if len(topics) == 0:
        raise ValueError("TopicSet is empty")
    tokens = []
    for topic in topics.topics:
        tokens.extend(term for term, _ in topic)
    return tokens


def dump_topics(entries: Sequence[Tuple[str, TopicSet]], path) -> None:
    """'# doc_id', затем 'topic_i: term:prob ...' на каждую тему."""
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='\n') as f:
        for doc_id, topic_set in entries:
            f.write(f"# {doc_id}\n")
            for i, topic in enumerate(topic_set.topics):
                body = ' '.join(f"{term}:{prob:.6f}" for term, prob in topic)
                f.write(f"topic_{i}: {body}\n")

"""
TopSpace: training topic documents, DicT and idf weights, query matrices,
optionally with the arousal feature.
"""
# topspace/pipeline.py
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .affect import AffectLexicon, ArousalContext, add_affect, arousal_matrix, training_mean
from .config import ExperimentConfig, Representation
from .corpus import Instance, Label, Stoplist, documents
from .errors import AffectUnavailableError, EmptyDocumentError
from .representation import (
    TermDocMatrix, Vocabulary, build_vocabulary, idf_weights, query_matrix, term_doc_matrix,
)
from .topics import (
    LdaConfig, QueryMode, TopicSet, TopicSource, VocabularyMode,
    document_topics, extract_topics, fit_lda, fit_lda_collection, topic_document,
)
from .utils import TokenNormalizer

logger = logging.getLogger(__name__)

# смещение сидов запросов относительно обучающих документов
_QUERY_SEED_OFFSET = 1_000_003


@dataclass(frozen=True)
class TopicDocuments:
    documents: Tuple[Tuple[str, ...], ...]   # d̂
    instances: Tuple[Instance, ...]          # без пропущенных
    topic_sets: Tuple[Tuple[str, TopicSet], ...]
    skipped: Tuple[str, ...]


@dataclass(frozen=True)
class TrainingSpace:
    matrix: TermDocMatrix
    instances: Tuple[Instance, ...]
    raw_docs: Tuple[Tuple[str, ...], ...]   # контексты до тематического представления
    topic_sets: Tuple[Tuple[str, TopicSet], ...]
    skipped: Tuple[str, ...]


@dataclass(frozen=True)
class Representations:
    train: TermDocMatrix
    query: TermDocMatrix
    train_labels: Tuple[Label, ...]
    query_labels: Tuple[Label, ...]
    skipped: Tuple[str, ...]
    arousal: Optional[ArousalContext]
    topic_sets: Tuple[Tuple[str, TopicSet], ...] = ()


class TopSpaceBuilder:
    """
    Строит обучающую и тестовую матрицы для одного прогона
    """

    def __init__(self, config: ExperimentConfig, stoplist: Stoplist,
                 lexicon: Optional[AffectLexicon] = None):
        self.config = config
        self.stoplist = stoplist
        self.lexicon = lexicon
        self.lda = config.resolved_lda()

    def contexts(self, instances: Sequence[Instance]) -> List[List[str]]:
        return documents(instances, self.config.context_mode, self.stoplist, self.config.keep_target)

    def class_vocabularies(self, instances: Sequence[Instance],
                           docs: Sequence[Sequence[str]]) -> Dict[Label, Vocabulary]:
        """DicI и DicL; в режиме ENLARGED оба равны их объединению."""
        vocabularies = {}
        for label in (Label.IDIOM, Label.LITERAL):
            terms = [t for inst, doc in zip(instances, docs) if inst.label is label for t in doc]
            vocabularies[label] = Vocabulary.from_terms(terms)
        if self.config.vocabulary_mode is VocabularyMode.ENLARGED:
            union = vocabularies[Label.IDIOM].union(vocabularies[Label.LITERAL])
            vocabularies = {label: union for label in vocabularies}
        return vocabularies

    def topic_documents(self, instances: Sequence[Instance], docs: Sequence[Sequence[str]],
                        seed: int) -> TopicDocuments:
        vocabularies = self.class_vocabularies(instances, docs)
        if self.config.topic_source is TopicSource.COLLECTION:
            return self._collection_topics(instances, docs, vocabularies, seed)

        k = self.lda.terms_per_topic
        hat_docs, kept, topic_sets, skipped = [], [], [], []
        for index, (instance, doc) in enumerate(zip(instances, docs)):
            config = self.lda.with_seed(TokenNormalizer.derived_seed(seed, index))
            try:
                model = fit_lda(doc, vocabularies[instance.label], config)
            except EmptyDocumentError:
                logger.warning(f"⚠️ Пустой контекст после ограничения словарём, пропуск: {instance.id}")
                skipped.append(instance.id)
                continue
            topics = extract_topics(model, k)
            hat_docs.append(tuple(topic_document(topics)))
            kept.append(instance)
            topic_sets.append((instance.id, topics))
        return TopicDocuments(tuple(hat_docs), tuple(kept), tuple(topic_sets), tuple(skipped))

    def _collection_topics(self, instances, docs, vocabularies, seed) -> TopicDocuments:
        """Одна модель на класс; документ берёт свои m самых вероятных тем."""
        m, k = self.lda.num_topics, self.lda.terms_per_topic
        per_doc: Dict[int, TopicSet] = {}
        skipped = []
        for class_index, label in enumerate((Label.IDIOM, Label.LITERAL)):
            vocab = vocabularies[label]
            members = []
            for position, (instance, doc) in enumerate(zip(instances, docs)):
                if instance.label is not label:
                    continue
                if not vocab.restrict(doc):
                    logger.warning(f"⚠️ Пустой контекст после ограничения словарём, пропуск: {instance.id}")
                    skipped.append(instance.id)
                    continue
                members.append(position)
            if not members:
                continue
            config = self.lda.model_copy(update={
                'num_topics': max(self.lda.collection_topics, m),
                'seed': TokenNormalizer.derived_seed(seed, class_index),
            })
            model = fit_lda_collection([docs[p] for p in members], vocab, config)
            for row, position in enumerate(members):
                per_doc[position] = document_topics(model, row, m, k)

        hat_docs, kept, topic_sets = [], [], []
        for position, instance in enumerate(instances):
            if position not in per_doc:
                continue
            topics = per_doc[position]
            hat_docs.append(tuple(topic_document(topics)))
            kept.append(instance)
            topic_sets.append((instance.id, topics))
        return TopicDocuments(tuple(hat_docs), tuple(kept), tuple(topic_sets), tuple(skipped))

    def query_documents(self, docs: Sequence[Sequence[str]], vocab: Vocabulary, seed: int):
        """Тексты запросов; в режиме QueryMode.TOPICS - термы тем запроса (с откатом к тексту)."""
        if self.config.query_mode is QueryMode.TEXT:
            return [list(doc) for doc in docs]
        result = []
        for index, doc in enumerate(docs):
            config = self.lda.with_seed(TokenNormalizer.derived_seed(seed, _QUERY_SEED_OFFSET + index))
            try:
                topics = extract_topics(fit_lda(doc, vocab, config), self.lda.terms_per_topic)
                result.append(topic_document(topics))
            except EmptyDocumentError:
                logger.debug(f"Запрос {index}: темы не извлечены, используется исходный текст")
                result.append(list(doc))
        return result

    def training_space(self, train: Sequence[Instance], seed: int) -> TrainingSpace:
        """M_D̂ (или M_D для текстового представления) со словарём DicT и весами idf."""
        train_docs = self.contexts(train)
        topic_sets: Tuple = ()
        skipped: Tuple[str, ...] = ()
        if self.config.representation is Representation.TOPICS:
            hat = self.topic_documents(train, train_docs, seed)
            instances, feature_docs = hat.instances, hat.documents
            topic_sets, skipped = hat.topic_sets, hat.skipped
        else:
            instances, feature_docs = tuple(train), tuple(tuple(d) for d in train_docs)

        vocab = build_vocabulary(feature_docs)
        weights = idf_weights(feature_docs, vocab)
        matrix = term_doc_matrix(feature_docs, vocab, weights,
                                 [i.id for i in instances], self.config.local_weight)
        return TrainingSpace(matrix, tuple(instances), tuple(tuple(d) for d in train_docs),
                             topic_sets, skipped)

    def arousal_context(self, train_docs: Sequence[Sequence[str]]) -> ArousalContext:
        if self.lexicon is None:
            raise AffectUnavailableError("Affect feature requested but no lexicon was loaded")
        return ArousalContext(training_mean(train_docs, self.lexicon), self.lexicon)

    def build(self, train: Sequence[Instance], test: Sequence[Instance], seed: int) -> Representations:
        space = self.training_space(train, seed)
        train_matrix = space.matrix
        test_docs = self.contexts(test)

        if self.config.representation is Representation.TOPICS:
            query_docs = self.query_documents(test_docs, train_matrix.vocab, seed)
        else:
            query_docs = test_docs
        query = query_matrix(query_docs, train_matrix.vocab, train_matrix.global_weights,
                             [i.id for i in test], self.config.local_weight)

        context = None
        if self.config.affect:
            # m_A по исходным обучающим контекстам, в том числе пропущенным
            context = self.arousal_context(space.raw_docs)
            mode = self.config.arousal_mode
            train_matrix = add_affect(train_matrix, arousal_matrix(train_matrix, context, mode))
            query = add_affect(query, arousal_matrix(query, context, mode))
            logger.debug(f"m_A = {context.mean:.4f}")

        return Representations(
            train=train_matrix,
            query=query,
            train_labels=tuple(i.label for i in space.instances),
            query_labels=tuple(i.label for i in test),
            skipped=space.skipped,
            arousal=context,
            topic_sets=space.topic_sets,
        )

"""Collapsed Gibbs LDA and topic extraction."""
import numpy as np
import pytest

from topspace.corpus import ContextMode
from topspace.errors import EmptyDocumentError
from topspace.representation import Vocabulary
from topspace.topics import (
    LdaConfig, LdaModel, TopicSet, default_num_topics, document_topics, dump_topics,
    extract_topics, fit_lda, fit_lda_collection, topic_document,
)

VOCAB_A = [f"a{n}" for n in range(10)]
VOCAB_B = [f"b{n}" for n in range(10)]


def _two_topic_corpus(seed, n_docs=10, doc_len=60, dominant=0.9):
    """Документы попеременно из словаря A или B с примесью другого."""
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(n_docs):
        main, other = (VOCAB_A, VOCAB_B) if d % 2 == 0 else (VOCAB_B, VOCAB_A)
        doc = []
        for _ in range(doc_len):
            source = main if rng.random() < dominant else other
            doc.append(source[int(rng.integers(len(source)))])
        docs.append(doc)
    return docs


class TestFitLda:
    """Сэмплер Гиббса."""

    def test_single_word_vocabulary(self):
        vocab = Vocabulary.from_terms(['whistle'])
        model = fit_lda(['whistle', 'whistle'], vocab, LdaConfig(num_topics=2, iterations=20, seed=1))
        topics = extract_topics(model, 10)
        assert [topic[0][0] for topic in topics.topics] == ['whistle', 'whistle']

    def test_rows_normalized(self):
        docs = _two_topic_corpus(3, n_docs=4, doc_len=30)
        vocab = Vocabulary.from_terms(VOCAB_A + VOCAB_B)
        model = fit_lda_collection(docs, vocab, LdaConfig(num_topics=3, iterations=30, seed=3))
        np.testing.assert_allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(model.theta.sum(axis=1), 1.0, atol=1e-9)

    def test_counts_conserved_every_sweep(self):
        docs = _two_topic_corpus(5, n_docs=3, doc_len=20)
        vocab = Vocabulary.from_terms(VOCAB_A + VOCAB_B)
        lengths = np.array([len(d) for d in docs])
        sweeps = []

        def trace(counts):
            assert counts.doc_topic.min() >= 0 and counts.topic_word.min() >= 0
            np.testing.assert_array_equal(counts.doc_topic.sum(axis=1), lengths)
            np.testing.assert_array_equal(counts.topic_word.sum(axis=1), counts.topic_totals)
            np.testing.assert_array_equal(counts.doc_topic.sum(axis=0), counts.topic_totals)
            assert counts.topic_totals.sum() == lengths.sum()
            sweeps.append(counts.iteration)

        fit_lda_collection(docs, vocab, LdaConfig(num_topics=2, iterations=15, seed=5), on_sweep=trace)
        assert sweeps == list(range(15))

    def test_deterministic(self):
        vocab = Vocabulary.from_terms(VOCAB_A + VOCAB_B)
        doc = _two_topic_corpus(7, n_docs=1, doc_len=50)[0]
        config = LdaConfig(num_topics=2, iterations=25, seed=11)
        first, second = fit_lda(doc, vocab, config), fit_lda(doc, vocab, config)
        np.testing.assert_array_equal(first.phi, second.phi)
        np.testing.assert_array_equal(first.assignments[0], second.assignments[0])

    def test_empty_after_restriction(self):
        vocab = Vocabulary.from_terms(['court'])
        with pytest.raises(EmptyDocumentError):
            fit_lda(['whistle'], vocab, LdaConfig())

    @pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
    def test_recovers_generating_vocabularies(self, seed):
        docs = _two_topic_corpus(seed)
        vocab = Vocabulary.from_terms(VOCAB_A + VOCAB_B)
        config = LdaConfig(num_topics=2, alpha=0.5, beta=0.1, iterations=200, seed=seed)
        topics = extract_topics(fit_lda_collection(docs, vocab, config), 10)

        matched = []
        for terms in topics.terms():
            overlaps = [len(set(terms) & set(VOCAB_A)), len(set(terms) & set(VOCAB_B))]
            assert max(overlaps) >= 8
            matched.append(int(np.argmax(overlaps)))
        assert sorted(matched) == [0, 1]


class TestTopicSets:
    """Отбор термов тем и d̂."""

    def _model(self, phi, terms):
        phi = np.asarray(phi, dtype=float)
        vocab = Vocabulary.from_terms(terms)
        return LdaModel(phi=phi, theta=np.full((1, phi.shape[0]), 1.0 / phi.shape[0]), vocab=vocab,
                        assignments=(np.zeros(1, dtype=np.int64),), config=LdaConfig())

    def test_truncated_to_vocabulary(self):
        model = self._model([[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]], ['a', 'b', 'c'])
        topics = extract_topics(model, 10)
        assert [len(topic) for topic in topics.topics] == [3, 3]

    def test_tie_prefers_lower_index(self):
        model = self._model([[0.25, 0.25, 0.5]], ['a', 'b', 'c'])
        assert extract_topics(model, 3).terms() == [['c', 'a', 'b']]

    def test_default_topic_counts(self):
        assert default_num_topics(ContextMode.SINGLE) == 2
        assert default_num_topics(ContextMode.MULTI) == 4
        assert LdaConfig(num_topics=2).effective_alpha == 25.0

    def test_topic_document_lengths(self):
        distinct = TopicSet(tuple(
            tuple((f"t{t}_{i}", 0.1) for i in range(10)) for t in range(4)
        ))
        assert len(topic_document(distinct)) == 40

        same = TopicSet(((('x', 0.6), ('y', 0.4)),) * 2)
        assert sorted(topic_document(same)) == ['x', 'x', 'y', 'y']

        assert topic_document(TopicSet(((('z', 1.0),),))) == ['z']

    def test_document_topics_orders_by_theta(self):
        model = self._model([[0.9, 0.1], [0.1, 0.9], [0.5, 0.5]], ['a', 'b'])
        model = LdaModel(phi=model.phi, theta=np.array([[0.2, 0.7, 0.1]]), vocab=model.vocab,
                         assignments=model.assignments, config=model.config)
        assert document_topics(model, 0, 2, 1).terms() == [['b'], ['a']]

    def test_dump_format(self, tmp_path):
        topics = TopicSet(((('court', 0.5), ('judge', 0.25)),))
        path = tmp_path / 'topics.txt'
        dump_topics([('doc-1', topics)], path)
        assert path.read_text(encoding='utf-8') == "# doc-1\ntopic_0: court:0.500000 judge:0.250000\n"

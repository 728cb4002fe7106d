"""Splits, metrics, end-to-end runs, plot data and synthetic corpora."""
import json
import time

import numpy as np
import pytest

from topspace.config import MODEL_VARIANTS, Classifier, ExperimentConfig, Representation
from topspace.corpus import ContextMode, Label, Stoplist
from topspace.errors import EmptyDatasetError, InsufficientExamplesError, MetricsError
from topspace.evaluation import (
    GridResult, Metrics, aggregate_comparisons, arousal_curve, compute_metrics, confusion_counts,
    format_table, gen_synthetic, projection_2d, random_split, run_experiment, run_grid,
    synthetic_lexicon, write_sidecar,
)
from topspace.affect import AffectLexicon, AffectNorm
from topspace.pipeline import TopSpaceBuilder
from topspace.representation import Vocabulary, term_doc_matrix
from topspace.topics import LdaConfig, QueryMode, TopicSource, VocabularyMode

from .conftest import make_dataset

I, L = Label.IDIOM, Label.LITERAL


def _fast_config(**overrides):
    values = dict(
        representation=Representation.TEXT,
        classifier=Classifier.FDA_KNN,
        split=(10, 10),
        runs=3,
        seed=7,
        lda=LdaConfig(num_topics=2, iterations=30),
    )
    values.update(overrides)
    return ExperimentConfig(**values)


class TestRandomSplit:
    """Разбиение на обучение и тест."""

    def test_test_partition_counts(self):
        dataset = make_dataset(27, 51)
        train, test = random_split(dataset, 20, 20, seed=3)
        assert sum(i.label is I for i in test) == 7
        assert sum(i.label is L for i in test) == 31
        assert len(train) == 40
        assert not {i.id for i in train} & {i.id for i in test}

    def test_same_seed_same_split(self):
        dataset = make_dataset(27, 51)
        first = random_split(dataset, 20, 20, seed=9)
        second = random_split(dataset, 20, 20, seed=9)
        assert [i.id for i in first[0]] == [i.id for i in second[0]]

    def test_empty_request(self):
        with pytest.raises(EmptyDatasetError):
            random_split(make_dataset(5, 5), 0, 0, seed=0)

    def test_insufficient_names_class(self):
        with pytest.raises(InsufficientExamplesError) as excinfo:
            random_split(make_dataset(5, 30), 20, 20, seed=0)
        assert excinfo.value.label == 'IDIOM'


class TestMetrics:
    """Idiom - положительный класс."""

    def test_all_correct(self):
        assert compute_metrics([I, L, I], [I, L, I]) == Metrics(1.0, 1.0, 1.0)

    def test_worked_example(self):
        metrics = compute_metrics([I, L, L, L], [I, I, L, L])
        assert (metrics.precision, metrics.recall, metrics.accuracy) == (1.0, 0.5, 0.75)

    def test_no_idiom_predicted(self):
        metrics = compute_metrics([L, L], [I, L])
        assert metrics.precision == 0.0
        assert metrics.recall == 0.0

    def test_length_mismatch(self):
        with pytest.raises(MetricsError):
            compute_metrics([I], [I, L])

    def test_empty(self):
        with pytest.raises(MetricsError):
            compute_metrics([], [])

    def test_matches_brute_force(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            gold = [I if v else L for v in rng.random(n) < 0.5]
            pred = [I if v else L for v in rng.random(n) < 0.5]
            tp = sum(p is I and g is I for p, g in zip(pred, gold))
            fp = sum(p is I and g is L for p, g in zip(pred, gold))
            fn = sum(p is L and g is I for p, g in zip(pred, gold))
            tn = n - tp - fp - fn
            assert tuple(confusion_counts(pred, gold)) == (tp, fp, fn, tn)
            metrics = compute_metrics(pred, gold)
            assert metrics.precision == (tp / (tp + fp) if tp + fp else 0.0)
            assert metrics.recall == (tp / (tp + fn) if tp + fn else 0.0)
            assert metrics.accuracy == (tp + tn) / n
            assert metrics.accuracy == 1 - sum(p is not g for p, g in zip(pred, gold)) / n


class TestSynthetic:
    """Синтетические корпуса и лексиконы."""

    def test_disjoint_vocabularies(self):
        dataset = gen_synthetic(6, 4, vocab_size_per_class=20, doc_len=15, overlap_fraction=0.0, seed=1)
        phrase = {'blow', 'whistle'}
        seen = {I: set(), L: set()}
        for instance in dataset.instances:
            for paragraph in instance.paragraphs:
                seen[instance.label].update(paragraph)
        assert not (seen[I] - phrase) & (seen[L] - phrase)
        assert dataset.counts()[I] == 6 and dataset.counts()[L] == 4

    def test_target_phrase_in_middle_paragraph(self):
        dataset = gen_synthetic(2, 2, doc_len=10, seed=4)
        for instance in dataset.instances:
            assert instance.target_paragraph_index == 1
            start, end = instance.target_span
            assert instance.paragraphs[1][start:end] == ('blow', 'whistle')

    def test_full_overlap_shares_vocabulary(self):
        dataset = gen_synthetic(5, 5, vocab_size_per_class=10, doc_len=40, overlap_fraction=1.0, seed=2)
        tokens = {t for i in dataset.instances for p in i.paragraphs for t in p}
        assert all(t.startswith('idi') or t in ('blow', 'whistle') for t in tokens)

    def test_deterministic(self):
        assert gen_synthetic(3, 3, seed=5) == gen_synthetic(3, 3, seed=5)

    def test_invalid_overlap(self):
        with pytest.raises(ValueError):
            gen_synthetic(3, 3, overlap_fraction=1.5)

    def test_lexicon_ranges(self):
        dataset = gen_synthetic(4, 4, vocab_size_per_class=10, doc_len=30, seed=3)
        lexicon = synthetic_lexicon(dataset, seed=3)
        for lemma, norm in lexicon.entries.items():
            if lemma.startswith('idi'):
                assert 5.0 <= norm.arousal <= 7.0
            elif lemma.startswith('lit'):
                assert 2.0 <= norm.arousal <= 4.0
            else:
                assert norm.arousal == 4.5


class TestProjection:
    """Данные двумерной проекции."""

    def test_two_dimensional_distances_preserved(self, rng):
        points = rng.normal(size=(2, 12))
        vocab = Vocabulary.from_terms(['x', 'y'])
        matrix = term_doc_matrix([[]] * 12, vocab, np.ones(2)).with_entries(points)
        coords = projection_2d(matrix)
        original = np.linalg.norm(points.T[:, None, :] - points.T[None, :, :], axis=2)
        projected = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
        np.testing.assert_allclose(projected, original, atol=1e-9)

    def test_identical_columns(self):
        vocab = Vocabulary.from_terms(['a', 'b', 'c'])
        matrix = term_doc_matrix([['a', 'b']] * 4, vocab, np.ones(3))
        np.testing.assert_array_equal(projection_2d(matrix), np.zeros((4, 2)))

    def test_rank_one_second_axis_zero(self):
        vocab = Vocabulary.from_terms(['a', 'b'])
        matrix = term_doc_matrix([['a'], ['a', 'a'], ['a', 'a', 'a']], vocab, np.ones(2))
        coords = projection_2d(matrix)
        np.testing.assert_array_equal(coords[:, 1], 0.0)
        assert np.ptp(coords[:, 0]) > 0

    def test_clusters_stay_apart(self, rng):
        first = rng.normal(size=(6, 10)) * 0.1
        second = rng.normal(size=(6, 10)) * 0.1 + 3.0
        vocab = Vocabulary.from_terms([f"t{n}" for n in range(6)])
        matrix = term_doc_matrix([[]] * 20, vocab, np.ones(6)).with_entries(np.hstack([first, second]))
        coords = projection_2d(matrix)
        a, b = coords[:10], coords[10:]
        between = np.linalg.norm(a.mean(axis=0) - b.mean(axis=0))
        within = np.mean([np.linalg.norm(a - a.mean(axis=0), axis=1).mean(),
                          np.linalg.norm(b - b.mean(axis=0), axis=1).mean()])
        assert between >= within


class TestArousalCurve:

    def test_word_at_mean(self):
        lexicon = AffectLexicon({'calm': AffectNorm(5.0, 4.0, 5.0)})
        assert arousal_curve([['calm']], lexicon, 4.0) == [0.0]

    def test_sorted(self):
        lexicon = AffectLexicon({'x': AffectNorm(5.0, 4.5, 5.0), 'y': AffectNorm(5.0, 3.5, 5.0)})
        assert arousal_curve([['x'], ['y']], lexicon, 4.0) == [-0.5, 0.5]

    def test_idiom_curve_above_literal(self, empty_stoplist):
        dataset = gen_synthetic(8, 8, vocab_size_per_class=20, doc_len=30, seed=6)
        lexicon = synthetic_lexicon(dataset, seed=6)
        config = ExperimentConfig(affect=True)
        builder = TopSpaceBuilder(config, empty_stoplist, lexicon)
        instances = dataset.labeled()
        docs = builder.contexts(instances)
        mean = builder.arousal_context(docs).mean
        idiom = arousal_curve([d for d, i in zip(docs, instances) if i.label is I], lexicon, mean)
        literal = arousal_curve([d for d, i in zip(docs, instances) if i.label is L], lexicon, mean)
        assert all(a >= b for a, b in zip(idiom, literal))


class TestRunExperiment:
    """Повторные прогоны."""

    def test_deterministic(self, empty_stoplist):
        dataset = gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=20, seed=1)
        config = _fast_config()
        first = run_experiment(config, dataset, empty_stoplist)
        second = run_experiment(config, dataset, empty_stoplist)
        assert first == second

    def test_single_run_mean(self, empty_stoplist):
        dataset = gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=20, seed=1)
        result = run_experiment(_fast_config(runs=1), dataset, empty_stoplist)
        assert result.mean == result.per_run[0]
        assert result.seeds == (7,)

    def test_run_seeds_xor_index(self, empty_stoplist):
        dataset = gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=20, seed=1)
        result = run_experiment(_fast_config(runs=3), dataset, empty_stoplist)
        assert result.seeds == (7, 6, 5)

    def test_process_pool_matches_sequential(self, empty_stoplist):
        dataset = gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=20, seed=1)
        sequential = run_experiment(_fast_config(runs=4), dataset, empty_stoplist)
        pooled = run_experiment(_fast_config(runs=4, workers=2), dataset, empty_stoplist)
        assert sequential.per_run == pooled.per_run

    def test_svm_and_affect(self, empty_stoplist):
        dataset = gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=20, seed=2)
        lexicon = synthetic_lexicon(dataset, seed=2)
        config = _fast_config(classifier=Classifier.SVM, affect=True)
        result = run_experiment(config, dataset, empty_stoplist, lexicon)
        assert result.model_name == 'SVMs-Text+A'
        assert 0.0 <= result.mean.accuracy <= 1.0

    def test_default_topic_settings(self):
        single = ExperimentConfig().resolved_lda()
        assert (single.num_topics, single.terms_per_topic) == (2, 10)
        assert ExperimentConfig(context_mode=ContextMode.MULTI).resolved_lda().num_topics == 4

    def test_topics_beat_threshold_on_separable_corpus(self, empty_stoplist):
        dataset = gen_synthetic(30, 20, vocab_size_per_class=50, doc_len=80, overlap_fraction=0.0, seed=0)
        lda = LdaConfig(num_topics=2, terms_per_topic=10, iterations=50)
        topics = run_experiment(
            _fast_config(representation=Representation.TOPICS, runs=10, lda=lda), dataset, empty_stoplist)
        text = run_experiment(_fast_config(runs=10, lda=lda), dataset, empty_stoplist)
        assert topics.mean.accuracy >= 0.9
        assert topics.mean.accuracy >= text.mean.accuracy - 0.05

    @pytest.mark.slow
    def test_default_sampler_settings_within_budget(self, empty_stoplist):
        dataset = gen_synthetic(30, 20, vocab_size_per_class=50, doc_len=80, overlap_fraction=0.0, seed=0)
        config = ExperimentConfig(representation=Representation.TOPICS, split=(20, 15), runs=10, seed=0)
        assert config.resolved_lda().iterations == 1000

        started = time.perf_counter()
        topics = run_experiment(config, dataset, empty_stoplist)
        elapsed = time.perf_counter() - started

        text = run_experiment(config.model_copy(update={'representation': Representation.TEXT}),
                              dataset, empty_stoplist)
        assert elapsed < 120.0
        assert topics.mean.accuracy >= 0.9
        assert topics.mean.accuracy >= text.mean.accuracy - 0.05


class TestTopicVariants:
    """Темы коллекции, расширенный словарь и тематические запросы."""

    @pytest.fixture
    def dataset(self):
        return gen_synthetic(15, 15, vocab_size_per_class=20, doc_len=40, seed=4, name='syn')

    def _config(self, **overrides):
        return _fast_config(representation=Representation.TOPICS, runs=2, **overrides)

    def test_collection_topics(self, dataset, empty_stoplist):
        config = self._config(topic_source=TopicSource.COLLECTION)
        builder = TopSpaceBuilder(config, empty_stoplist)
        instances = dataset.labeled()
        docs = builder.contexts(instances)
        vocabularies = builder.class_vocabularies(instances, docs)
        hat = builder.topic_documents(instances, docs, seed=1)
        lda = config.resolved_lda()

        assert [doc_id for doc_id, _ in hat.topic_sets] == [i.id for i in instances]
        for instance, (_, topics), doc in zip(hat.instances, hat.topic_sets, hat.documents):
            assert len(topics) == lda.num_topics
            assert all(len(topic) == lda.terms_per_topic for topic in topics.topics)
            assert all(term in vocabularies[instance.label].index for term in doc)

        assert run_experiment(config, dataset, empty_stoplist).mean.accuracy >= 0.8

    def test_enlarged_vocabulary(self, dataset, empty_stoplist):
        config = self._config(vocabulary_mode=VocabularyMode.ENLARGED)
        builder = TopSpaceBuilder(config, empty_stoplist)
        instances = dataset.labeled()
        vocabularies = builder.class_vocabularies(instances, builder.contexts(instances))
        restricted = TopSpaceBuilder(self._config(), empty_stoplist).class_vocabularies(
            instances, builder.contexts(instances))

        assert vocabularies[I].terms == vocabularies[L].terms
        assert vocabularies[I].terms == restricted[I].union(restricted[L]).terms
        assert len(restricted[I]) < len(vocabularies[I])
        assert run_experiment(config, dataset, empty_stoplist).mean.accuracy >= 0.8

    def test_topic_queries(self, dataset, empty_stoplist):
        config = self._config(query_mode=QueryMode.TOPICS)
        builder = TopSpaceBuilder(config, empty_stoplist)
        instances = dataset.labeled()
        space = builder.training_space(instances[:20], seed=1)
        vocab = space.matrix.vocab
        lda = config.resolved_lda()

        queries = builder.query_documents(builder.contexts(instances[20:]), vocab, seed=1)
        for query in queries:
            assert len(query) == lda.num_topics * lda.terms_per_topic
            assert all(term in vocab.index for term in query)
        assert builder.query_documents([['zzz', 'yyy']], vocab, seed=1) == [['zzz', 'yyy']]

        assert run_experiment(config, dataset, empty_stoplist).mean.accuracy >= 0.8


class TestGrid:
    """Все варианты модели, таблица и побочный JSON."""

    @pytest.fixture
    def grid(self, empty_stoplist):
        dataset = gen_synthetic(12, 12, vocab_size_per_class=15, doc_len=15, seed=3, name='syn')
        lexicon = synthetic_lexicon(dataset, seed=3)
        config = _fast_config(runs=2, lda=LdaConfig(num_topics=2, iterations=15))
        return run_grid([(dataset, (6, 6))], config, MODEL_VARIANTS, empty_stoplist, lexicon)

    def test_eight_rows(self, grid):
        assert len(grid.models) == 8
        assert grid.models[0] == 'FDA-Topics'
        lines = format_table(grid).splitlines()
        assert lines[0].split('\t') == ['Model', 'syn Prec', 'syn Recall', 'syn Acc']
        assert len(lines) == 9
        assert sum('*' in line for line in lines) == 1

    def test_two_decimals(self, grid):
        for line in format_table(grid).splitlines()[1:]:
            for cell in line.split('\t')[1:]:
                assert len(cell.rstrip('*').split('.')[1]) == 2

    def test_sidecar_reproducible(self, grid, tmp_path):
        write_sidecar(grid, tmp_path / 'a.json')
        write_sidecar(grid, tmp_path / 'b.json')
        assert (tmp_path / 'a.json').read_bytes() == (tmp_path / 'b.json').read_bytes()
        payload = json.loads((tmp_path / 'a.json').read_text(encoding='utf-8'))
        assert len(payload['datasets']['syn']['FDA-Topics']['runs']) == 2

    def test_aggregate_rows(self, grid):
        rows = aggregate_comparisons(grid)
        assert {row[0] for row in rows} == {'topics_vs_text', 'text_vs_text_affect', 'topics_vs_topics_affect'}
        assert len(rows) == 9

    def test_missing_lexicon_skips_affect_rows(self, empty_stoplist):
        dataset = gen_synthetic(8, 8, vocab_size_per_class=10, doc_len=10, seed=4)
        config = _fast_config(runs=1, lda=LdaConfig(num_topics=2, iterations=10))
        grid = run_grid([(dataset, (4, 4))], config, MODEL_VARIANTS, empty_stoplist)
        assert len(grid.models) == 4
        assert not any(m.endswith('+A') for m in grid.models)

    def test_empty_grid_table(self):
        assert format_table(GridResult()) == 'Model\n'

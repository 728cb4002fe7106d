"""Corpus loading, context windows and preprocessing."""
import json

import pytest

from topspace.corpus import (
    ContextMode, Label, Stoplist, context_tokens, context_window, dump_dataset, load_dataset,
    load_stoplist, preprocess,
)
from topspace.errors import CorpusParseError, CorpusValidationError, EmptyDatasetError

from .conftest import make_instance


def _record(id_, label='I', expression='blow_whistle', paragraphs=None, index=0, span=(0, 2)):
    return {
        'id': id_,
        'expression': expression,
        'label': label,
        'paragraphs': paragraphs or [['blow', 'whistle', 'on', 'fraud']],
        'target_paragraph_index': index,
        'target_span': list(span),
    }


def _write(path, records):
    path.write_text(''.join(json.dumps(r) + '\n' for r in records), encoding='utf-8')
    return path


class TestLoadDataset:
    """Чтение и валидация корпуса."""

    def test_counts_by_label(self, tmp_path):
        records = [_record(f"i{n}", 'I') for n in range(27)] + [_record(f"l{n}", 'L') for n in range(51)]
        dataset = load_dataset(_write(tmp_path / 'bw.jsonl', records))
        assert len(dataset) == 78
        counts = dataset.counts()
        assert counts[Label.IDIOM] == 27
        assert counts[Label.LITERAL] == 51

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'empty.jsonl'
        path.write_text('', encoding='utf-8')
        with pytest.raises(EmptyDatasetError):
            load_dataset(path)

    def test_span_outside_paragraph_names_instance(self, tmp_path):
        path = _write(tmp_path / 'bad.jsonl', [_record('ok'), _record('bad', span=(3, 9))])
        with pytest.raises(CorpusValidationError) as excinfo:
            load_dataset(path)
        assert excinfo.value.instance_id == 'bad'

    def test_mixed_expressions(self, tmp_path):
        path = _write(tmp_path / 'mixed.jsonl', [_record('a'), _record('b', expression='lose head')])
        with pytest.raises(CorpusValidationError) as excinfo:
            load_dataset(path)
        assert excinfo.value.instance_id == 'b'

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / 'broken.jsonl'
        path.write_text(json.dumps(_record('a')) + '\n{not json\n', encoding='utf-8')
        with pytest.raises(CorpusParseError) as excinfo:
            load_dataset(path)
        assert excinfo.value.line_number == 2

    def test_label_aliases_and_unknown_excluded(self, tmp_path):
        path = _write(tmp_path / 'q.jsonl', [_record('a', 'idiom'), _record('b', 'literal'), _record('c', '?')])
        dataset = load_dataset(path)
        assert [i.label for i in dataset.instances] == [Label.IDIOM, Label.LITERAL, Label.UNKNOWN]
        assert [i.id for i in dataset.labeled()] == ['a', 'b']

    def test_dump_and_reload(self, tmp_path):
        path = _write(tmp_path / 'src.jsonl', [_record('a'), _record('b', 'L')])
        dataset = load_dataset(path, name='src')
        dump_dataset(dataset, tmp_path / 'copy.jsonl')
        assert load_dataset(tmp_path / 'copy.jsonl', name='src') == dataset


class TestContextWindow:
    """Окно из одного или трёх абзацев."""

    @pytest.fixture
    def three_paragraphs(self):
        return make_instance('x', Label.IDIOM, [['a', 'b'], ['blow', 'whistle', 'c'], ['d']],
                             target_paragraph_index=1, target_span=(0, 2))

    def test_single(self, three_paragraphs):
        assert context_window(three_paragraphs, ContextMode.SINGLE) == ['blow', 'whistle', 'c']

    def test_multi(self, three_paragraphs):
        assert context_window(three_paragraphs, ContextMode.MULTI) == ['a', 'b', 'blow', 'whistle', 'c', 'd']

    def test_multi_without_neighbors(self):
        instance = make_instance('y', Label.LITERAL, [['blow', 'whistle']], target_span=(0, 2))
        assert context_window(instance, ContextMode.MULTI) == ['blow', 'whistle']

    def test_drop_target_uses_window_offsets(self, three_paragraphs):
        tokens = context_tokens(three_paragraphs, ContextMode.MULTI, Stoplist(frozenset()), keep_target=False)
        assert tokens == ['a', 'b', 'c', 'd']

    def test_single_is_contiguous_in_multi(self, rng):
        words = ['a', 'b', 'c', 'blow', 'whistle']
        for n in range(30):
            paragraphs = [list(rng.choice(words, size=int(rng.integers(1, 6))))
                          for _ in range(int(rng.integers(1, 5)))]
            index = int(rng.integers(len(paragraphs)))
            instance = make_instance(f"r{n}", Label.IDIOM, paragraphs, target_paragraph_index=index,
                                     target_span=(0, 1))
            single = context_window(instance, ContextMode.SINGLE)
            multi = context_window(instance, ContextMode.MULTI)
            starts = [s for s in range(len(multi) - len(single) + 1) if multi[s:s + len(single)] == single]
            assert starts

    def test_drop_target_keeps_repeated_words(self):
        instance = make_instance('z', Label.IDIOM, [['a', 'blow', 'whistle', 'b', 'c']], target_span=(1, 3))
        stoplist = Stoplist(frozenset())
        tokens = context_tokens(instance, ContextMode.SINGLE, stoplist, keep_target=False)
        assert tokens == ['a', 'b', 'c']
        assert preprocess(tokens, stoplist) == tokens


class TestPreprocess:
    """Удаление стоп-слов."""

    def test_stopword_removed(self):
        stoplist = Stoplist(frozenset({'the'}))
        assert preprocess(['the', 'sergeant', 'hold', 'fire'], stoplist) == ['sergeant', 'hold', 'fire']

    def test_empty(self):
        assert preprocess([], Stoplist(frozenset({'the'}))) == []

    def test_all_stopwords(self):
        assert preprocess(['the', 'a'], Stoplist(frozenset({'the', 'a'}))) == []

    def test_lowercases(self):
        assert preprocess(['The', 'Whistle'], Stoplist(frozenset({'the'}))) == ['whistle']

    def test_idempotent(self, rng):
        vocabulary = ['the', 'The', 'a', 'blow', 'Whistle', 'on', 'fraud', 'of']
        stoplist = Stoplist(frozenset({'the', 'a', 'of'}))
        for _ in range(50):
            tokens = list(rng.choice(vocabulary, size=int(rng.integers(0, 12))))
            once = preprocess(tokens, stoplist)
            assert preprocess(once, stoplist) == once

    def test_default_stoplist_keeps_prepositions(self):
        stoplist = load_stoplist()
        assert 'the' in stoplist
        assert 'on' not in stoplist
        assert 'whistle' not in stoplist

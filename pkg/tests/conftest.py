import numpy as np
import pytest

from topspace.corpus import Dataset, Instance, Label, Stoplist


def make_instance(id_, label, paragraphs, target_paragraph_index=0, target_span=(0, 1),
                  expression='blow_whistle'):
    return Instance(
        id=id_,
        expression=expression,
        label=label,
        paragraphs=paragraphs,
        target_paragraph_index=target_paragraph_index,
        target_span=target_span,
    )


def make_dataset(n_idiom, n_literal, name='toy'):
    """Короткие контексты: только целевая фраза и одно слово класса."""
    instances = []
    for i in range(n_idiom):
        instances.append(make_instance(f"i{i}", Label.IDIOM, [['blow', 'whistle', f"idi{i % 5}"]],
                                       target_span=(0, 2)))
    for i in range(n_literal):
        instances.append(make_instance(f"l{i}", Label.LITERAL, [['blow', 'whistle', f"lit{i % 5}"]],
                                       target_span=(0, 2)))
    return Dataset(name=name, expression='blow_whistle', instances=tuple(instances))


@pytest.fixture
def empty_stoplist():
    return Stoplist(frozenset())


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv('TOPSPACE_SEED', raising=False)
    monkeypatch.delenv('TOPSPACE_DB_URL', raising=False)
    return tmp_path

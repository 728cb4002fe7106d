"""
Labeled corpora of target-phrase occurrences: loading, windowing, preprocessing.

Corpus file: UTF-8, one JSON record per line with fields
``id``, ``expression``, ``label`` ("I" | "L" | "Q"), ``paragraphs``
(array of arrays of lemmas), ``target_paragraph_index`` and
``target_span`` ([start, end) token offsets inside the target paragraph).
"""
# topspace/corpus.py
import json
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import CorpusParseError, CorpusValidationError, EmptyDatasetError
from .utils import TokenNormalizer

logger = logging.getLogger(__name__)


class Label(str, Enum):
    IDIOM = 'I'
    LITERAL = 'L'
    UNKNOWN = 'Q'


class ContextMode(str, Enum):
    SINGLE = 'single'
    MULTI = 'multi'


# Стандартные разбиения (идиомы, литералы) для обучающей выборки
SPLIT_PRESETS = {
    'blow_whistle': (20, 20),
    'lose_head': (15, 15),
    'make_scene': (15, 15),
    'take_heart': (15, 15),
}


class Instance(BaseModel):
    """Одно размеченное вхождение целевого выражения с контекстом."""
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    expression: str
    label: Label
    paragraphs: Tuple[Tuple[str, ...], ...]
    target_paragraph_index: int
    target_span: Tuple[int, int]

    @field_validator('label', mode='before')
    @classmethod
    def _normalize_label(cls, value):
        if isinstance(value, Label):
            return value
        code = TokenNormalizer.normalize_label(value)
        if code is None:
            raise ValueError(f"unknown label {value!r}")
        return code

    @field_validator('expression', mode='before')
    @classmethod
    def _normalize_expression(cls, value):
        normalized = TokenNormalizer.normalize_expression(value)
        if normalized is None:
            raise ValueError("expression must be a non-empty string")
        return normalized

    @field_validator('paragraphs', mode='before')
    @classmethod
    def _normalize_paragraphs(cls, value):
        if not isinstance(value, (list, tuple)):
            return value
        normalized = []
        for paragraph in value:
            if not isinstance(paragraph, (list, tuple)):
                return value
            tokens = []
            for token in paragraph:
                cleaned = TokenNormalizer.normalize_token(token)
                if cleaned is None:
                    raise ValueError(f"invalid token {token!r}")
                tokens.append(cleaned)
            normalized.append(tuple(tokens))
        return tuple(normalized)

    @model_validator(mode='after')
    def _check_target(self):
        if not self.paragraphs:
            raise ValueError("at least one paragraph is required")
        if any(len(p) == 0 for p in self.paragraphs):
            raise ValueError("paragraphs must be non-empty")
        if not 0 <= self.target_paragraph_index < len(self.paragraphs):
            raise ValueError(
                f"target_paragraph_index {self.target_paragraph_index} out of range "
                f"for {len(self.paragraphs)} paragraphs"
            )
        start, end = self.target_span
        length = len(self.paragraphs[self.target_paragraph_index])
        if not 0 <= start < end <= length:
            raise ValueError(f"target_span ({start}, {end}) outside paragraph of {length} tokens")
        return self

    @property
    def excluded(self) -> bool:
        return self.label is Label.UNKNOWN

    def to_record(self) -> dict:
        return self.model_dump(mode='json')


class Dataset(BaseModel):
    """Набор вхождений одного выражения."""
    model_config = ConfigDict(frozen=True)

    name: str
    expression: str
    instances: Tuple[Instance, ...]

    @model_validator(mode='after')
    def _check_consistency(self):
        problem = find_inconsistency(self.instances, self.expression)
        if problem:
            raise ValueError(f"instance {problem[0]!r}: {problem[1]}")
        return self

    def __len__(self):
        return len(self.instances)

    def labeled(self) -> List[Instance]:
        """Только I/L: вхождения с меткой Q в обучение и тест не попадают."""
        return [i for i in self.instances if not i.excluded]

    def by_label(self, label: Label) -> List[Instance]:
        return [i for i in self.instances if i.label is label]

    def counts(self) -> dict:
        counter = Counter(i.label for i in self.instances)
        return {label: counter.get(label, 0) for label in Label}


def find_inconsistency(instances: Sequence[Instance], expression: str) -> Optional[Tuple[str, str]]:
    """(id, причина) первого нарушения: другое выражение или повтор id."""
    seen = set()
    for instance in instances:
        if instance.expression != expression:
            return instance.id, f"expression {instance.expression!r} differs from {expression!r}"
        if instance.id in seen:
            return instance.id, "duplicate id"
        seen.add(instance.id)
    return None


@dataclass(frozen=True)
class Stoplist:
    words: frozenset

    def __contains__(self, lemma):
        return lemma in self.words

    def __len__(self):
        return len(self.words)


def _parse_record(line: str, line_number: int) -> Instance:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusParseError(line_number, f"invalid JSON ({e.msg})") from e
    if not isinstance(payload, dict):
        raise CorpusParseError(line_number, "record must be an object")

    try:
        return Instance.model_validate(payload)
    except ValidationError as e:
        errors = e.errors()
        # Ошибки model_validator приходят с пустым loc: это нарушение инварианта, а не формата
        if errors and all(not err.get('loc') for err in errors):
            reason = '; '.join(err['msg'] for err in errors)
            raise CorpusValidationError(payload.get('id'), reason) from e
        fields = ', '.join('.'.join(str(p) for p in err['loc']) for err in errors)
        raise CorpusParseError(line_number, f"malformed fields: {fields}") from e


def load_dataset(path, name: Optional[str] = None) -> Dataset:
    """
    Загружает и валидирует корпус.

    Вхождения с меткой Q сохраняются, но помечаются как исключённые.
    """
    path = Path(path)
    instances = []
    with path.open('r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            instances.append(_parse_record(line, line_number))

    if not instances:
        raise EmptyDatasetError(f"Corpus {path} contains no records")

    expression = instances[0].expression
    problem = find_inconsistency(instances, expression)
    if problem:
        raise CorpusValidationError(*problem)
    dataset = Dataset(name=name or path.stem, expression=expression, instances=tuple(instances))

    counts = dataset.counts()
    logger.info(
        f"📚 Корпус {dataset.name}: {len(dataset)} записей "
        f"(I: {counts[Label.IDIOM]}, L: {counts[Label.LITERAL]}, Q: {counts[Label.UNKNOWN]})"
    )
    return dataset


def dump_dataset(dataset: Dataset, path) -> None:
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='\n') as f:
        for instance in dataset.instances:
            f.write(json.dumps(instance.to_record(), ensure_ascii=False, sort_keys=True))
            f.write('\n')


def load_stoplist(path=None) -> Stoplist:
    """
    Читает стоп-лист (одна лемма на строку, '#' - комментарий).
    Без пути берётся список по умолчанию из пакета.
    """
    if path is None:
        text = resources.files('topspace').joinpath('data', 'stoplist.txt').read_text(encoding='utf-8')
    else:
        text = Path(path).read_text(encoding='utf-8')

    words = set()
    for line in text.splitlines():
        line = line.split('#', 1)[0]
        token = TokenNormalizer.normalize_token(line)
        if token:
            words.add(token)
    return Stoplist(frozenset(words))


def _window_bounds(instance: Instance, mode: ContextMode) -> Tuple[int, int]:
    index = instance.target_paragraph_index
    if ContextMode(mode) is ContextMode.SINGLE:
        return index, index
    return max(0, index - 1), min(len(instance.paragraphs) - 1, index + 1)


def context_window(instance: Instance, mode: ContextMode) -> List[str]:
    first, last = _window_bounds(instance, mode)
    tokens = []
    for paragraph in instance.paragraphs[first:last + 1]:
        tokens.extend(paragraph)
    return tokens


def preprocess(tokens: Sequence[str], stoplist: Stoplist) -> List[str]:
    """Нижний регистр и удаление стоп-слов; порядок сохраняется."""
    result = []
    for token in tokens:
        lemma = token.lower()
        if lemma not in stoplist:
            result.append(lemma)
    return result


def context_tokens(instance: Instance, mode: ContextMode, stoplist: Stoplist,
                   keep_target: bool = True) -> List[str]:
    """
    Окно контекста после preprocess. При keep_target=False токены
    target_span вырезаются из окна до фильтрации.
    """
    tokens = context_window(instance, mode)
    if not keep_target:
        first, _ = _window_bounds(instance, mode)
        offset = sum(len(p) for p in instance.paragraphs[first:instance.target_paragraph_index])
        start, end = instance.target_span
        tokens = tokens[:offset + start] + tokens[offset + end:]
    return preprocess(tokens, stoplist)


def documents(instances: Iterable[Instance], mode: ContextMode, stoplist: Stoplist,
              keep_target: bool = True) -> List[List[str]]:
    return [context_tokens(i, mode, stoplist, keep_target) for i in instances]

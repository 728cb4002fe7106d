"""Experiment configuration and the plain key=value config file."""
# topspace/config.py
import json
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .affect import ArousalMode
from .corpus import ContextMode
from .errors import TopSpaceError
from .representation import LocalWeight
from .topics import LdaConfig, QueryMode, TopicSource, VocabularyMode, default_num_topics


class Representation(str, Enum):
    TEXT = 'text'
    TOPICS = 'topics'


class Classifier(str, Enum):
    FDA_KNN = 'fda'
    SVM = 'svm'


class ExperimentConfig(BaseModel):
    """Параметры одного эксперимента (один датасет, одна модель)."""
    model_config = ConfigDict(frozen=True)

    dataset_path: Optional[str] = None
    context_mode: ContextMode = ContextMode.SINGLE
    representation: Representation = Representation.TOPICS
    affect: bool = False
    classifier: Classifier = Classifier.FDA_KNN
    lda: Optional[LdaConfig] = None
    split: Tuple[int, int] = (20, 20)
    runs: int = Field(10, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)

    keep_target: bool = True
    vocabulary_mode: VocabularyMode = VocabularyMode.RESTRICTED
    topic_source: TopicSource = TopicSource.DOCUMENT
    query_mode: QueryMode = QueryMode.TEXT
    local_weight: LocalWeight = LocalWeight.RAW
    arousal_mode: ArousalMode = ArousalMode.INDICATOR

    # None: k = ceil(n/5)
    knn_k: Optional[int] = Field(None, ge=1)
    svm_c: float = Field(1.0, gt=0)
    svm_gamma: Optional[float] = Field(None, gt=0)

    stoplist_path: Optional[str] = None
    lexicon_path: Optional[str] = None
    workers: int = Field(1, ge=1)

    @model_validator(mode='after')
    def _check_split(self):
        idioms, literals = self.split
        if idioms < 0 or literals < 0:
            raise ValueError("split counts must be non-negative")
        if idioms + literals == 0:
            raise ValueError("split must request at least one training example")
        return self

    def resolved_lda(self) -> LdaConfig:
        if self.lda is not None:
            return self.lda
        return LdaConfig(num_topics=default_num_topics(self.context_mode), seed=self.seed)

    @property
    def model_name(self) -> str:
        """Подпись строки таблицы: FDA-Topics, SVMs-Text+A, ..."""
        head = 'FDA' if self.classifier is Classifier.FDA_KNN else 'SVMs'
        body = 'Topics' if self.representation is Representation.TOPICS else 'Text'
        return f"{head}-{body}{'+A' if self.affect else ''}"

    def canonical_json(self) -> str:
        payload = self.model_dump(mode='json', exclude={'dataset_path', 'workers'})
        payload['lda'] = self.resolved_lda().model_dump(mode='json')
        return json.dumps(payload, sort_keys=True)


MODEL_VARIANTS = tuple(
    (classifier, representation, affect)
    for classifier in (Classifier.FDA_KNN, Classifier.SVM)
    for representation in (Representation.TOPICS, Representation.TEXT)
    for affect in (False, True)
)


def load_key_value_file(path) -> Dict[str, str]:
    """
    Файл key=value, '#' - комментарий, пустые строки пропускаются.
    Ключи нормализуются: 'knn-auto' и 'knn_auto' эквивалентны.
    """
    values = {}
    text = Path(path).read_text(encoding='utf-8')
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip().replace('-', '_')
        if not sep or not key:
            raise TopSpaceError(f"{path}: line {line_number} is not key=value: {raw!r}")
        values[key] = value.strip()
    return values

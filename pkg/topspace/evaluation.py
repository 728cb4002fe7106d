"""
Experiment protocol: seeded splits, repeated runs, precision/recall/accuracy,
result tables, plot data and synthetic corpora.
"""
# topspace/evaluation.py
import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sklearn.decomposition import PCA

from .affect import AffectLexicon, AffectNorm, ArousalContext, document_arousal, load_lexicon
from .classify import fit_fda, fit_svm, knn_classify, svm_classify
from .config import MODEL_VARIANTS, Classifier, ExperimentConfig
from .corpus import Dataset, Instance, Label, Stoplist, load_dataset, load_stoplist
from .errors import AffectUnavailableError, EmptyDatasetError, InsufficientExamplesError, MetricsError
from .pipeline import Representations, TopSpaceBuilder
from .representation import TermDocMatrix
from .utils import TokenNormalizer

logger = logging.getLogger(__name__)


class Confusion(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class Metrics:
    """Положительный класс - Idiom."""
    precision: float
    recall: float
    accuracy: float

    def as_dict(self) -> dict:
        return {'precision': self.precision, 'recall': self.recall, 'accuracy': self.accuracy}

    @property
    def total(self) -> float:
        return self.precision + self.recall + self.accuracy


@dataclass(frozen=True)
class RunOutcome:
    run_index: int
    seed: int
    metrics: Metrics
    confusion: Confusion
    predictions: Tuple[Label, ...]
    gold: Tuple[Label, ...]
    representations: Representations
    model: object


@dataclass(frozen=True)
class RunResult:
    model_name: str
    dataset: str
    per_run: Tuple[Metrics, ...]
    mean: Metrics
    confusions: Tuple[Confusion, ...]
    seeds: Tuple[int, ...]
    skipped: Tuple[Tuple[str, ...], ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            'model': self.model_name,
            'dataset': self.dataset,
            'mean': self.mean.as_dict(),
            'runs': [
                {
                    'seed': seed,
                    'metrics': metrics.as_dict(),
                    'confusion': confusion._asdict(),
                    'skipped': list(skipped),
                }
                for seed, metrics, confusion, skipped in zip(
                    self.seeds, self.per_run, self.confusions,
                    self.skipped or [()] * len(self.per_run))
            ],
        }


# ==================== РАЗБИЕНИЕ И МЕТРИКИ ====================

def random_split(dataset: Dataset, train_idioms: int, train_literals: int,
                 seed: int) -> Tuple[List[Instance], List[Instance]]:
    """
    Равномерная выборка без возвращения по каждому классу; остальное - тест.
    Порядок вхождений в обеих частях совпадает с порядком в датасете.
    """
    if train_idioms + train_literals <= 0:
        raise EmptyDatasetError("Training split is empty: request at least one example")

    rng = np.random.default_rng(seed)
    chosen = set()
    for label, requested in ((Label.IDIOM, train_idioms), (Label.LITERAL, train_literals)):
        members = dataset.by_label(label)
        if requested > len(members):
            raise InsufficientExamplesError(label.name, requested, len(members))
        picked = rng.choice(len(members), size=requested, replace=False)
        chosen.update(members[int(i)].id for i in picked)

    train = [i for i in dataset.labeled() if i.id in chosen]
    test = [i for i in dataset.labeled() if i.id not in chosen]
    return train, test


def confusion_counts(predicted: Sequence, gold: Sequence, positive=Label.IDIOM) -> Confusion:
    if len(predicted) != len(gold):
        raise MetricsError(f"{len(predicted)} predictions for {len(gold)} gold labels")
    if len(gold) == 0:
        raise MetricsError("Cannot compute metrics on an empty test set")
    tp = fp = fn = tn = 0
    for p, g in zip(predicted, gold):
        if p == positive:
            if g == positive:
                tp += 1
            else:
                fp += 1
        elif g == positive:
            fn += 1
        else:
            tn += 1
    return Confusion(tp, fp, fn, tn)


def metrics_from_confusion(confusion: Confusion) -> Metrics:
    tp, fp, fn, tn = confusion
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    accuracy = (tp + tn) / (tp + fp + fn + tn)
    return Metrics(precision, recall, accuracy)


def compute_metrics(predicted: Sequence, gold: Sequence) -> Metrics:
    return metrics_from_confusion(confusion_counts(predicted, gold))


def mean_metrics(values: Sequence[Metrics]) -> Metrics:
    return Metrics(
        float(np.mean([m.precision for m in values])),
        float(np.mean([m.recall for m in values])),
        float(np.mean([m.accuracy for m in values])),
    )


# ==================== ПРОГОНЫ ====================

def _classify(config: ExperimentConfig, reps: Representations):
    X, Q = reps.train.entries, reps.query.entries
    if config.classifier is Classifier.FDA_KNN:
        model = fit_fda(X, reps.train_labels, k_neighbors=config.knn_k)
        predictions = tuple(knn_classify(model, p) for p in model.project(Q))
    else:
        model = fit_svm(X, reps.train_labels, C=config.svm_c, gamma=config.svm_gamma)
        predictions = tuple(svm_classify(model, Q[:, j]) for j in range(Q.shape[1]))
    return model, predictions


def run_once(config: ExperimentConfig, dataset: Dataset, stoplist: Stoplist,
             lexicon: Optional[AffectLexicon], run_index: int) -> RunOutcome:
    seed = TokenNormalizer.run_seed(config.seed, run_index)
    train, test = random_split(dataset, *config.split, seed=seed)
    reps = TopSpaceBuilder(config, stoplist, lexicon).build(train, test, seed)
    model, predictions = _classify(config, reps)
    confusion = confusion_counts(predictions, reps.query_labels)
    metrics = metrics_from_confusion(confusion)
    logger.debug(
        f"Прогон {run_index}: P={metrics.precision:.3f} R={metrics.recall:.3f} "
        f"A={metrics.accuracy:.3f}, пропущено {len(reps.skipped)}"
    )
    return RunOutcome(run_index, seed, metrics, confusion, predictions, reps.query_labels, reps, model)


def _run_job(args) -> RunOutcome:
    return run_once(*args)


def _resolve_inputs(config: ExperimentConfig, dataset, stoplist, lexicon):
    if dataset is None:
        if config.dataset_path is None:
            raise EmptyDatasetError("No dataset given")
        dataset = load_dataset(config.dataset_path)
    if stoplist is None:
        stoplist = load_stoplist(config.stoplist_path)
    if config.affect and lexicon is None:
        if config.lexicon_path is None:
            raise AffectUnavailableError("Affect feature requested but no lexicon path configured")
        lexicon = load_lexicon(config.lexicon_path)
    return dataset, stoplist, lexicon


def collect_outcomes(config: ExperimentConfig, dataset: Optional[Dataset] = None,
                     stoplist: Optional[Stoplist] = None,
                     lexicon: Optional[AffectLexicon] = None) -> Tuple[Dataset, List[RunOutcome]]:
    dataset, stoplist, lexicon = _resolve_inputs(config, dataset, stoplist, lexicon)
    jobs = [(config, dataset, stoplist, lexicon, r) for r in range(config.runs)]
    if config.workers > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_run_job, jobs))
    else:
        outcomes = [_run_job(job) for job in jobs]
    return dataset, outcomes


def summarize(config: ExperimentConfig, dataset_name: str, outcomes: Sequence[RunOutcome]) -> RunResult:
    per_run = tuple(o.metrics for o in outcomes)
    return RunResult(
        model_name=config.model_name,
        dataset=dataset_name,
        per_run=per_run,
        mean=mean_metrics(per_run),
        confusions=tuple(o.confusion for o in outcomes),
        seeds=tuple(o.seed for o in outcomes),
        skipped=tuple(o.representations.skipped for o in outcomes),
    )


def _log_result(result: RunResult, runs: int):
    logger.info(
        f"📊 {result.model_name} на {result.dataset} ({runs} прогонов): "
        f"Prec {result.mean.precision:.2f}, Recall {result.mean.recall:.2f}, Acc {result.mean.accuracy:.2f}"
    )
    skipped = sum(len(s) for s in result.skipped)
    if skipped:
        logger.warning(f"⚠️ Пропущено обучающих документов за все прогоны: {skipped}")


def run_experiment(config: ExperimentConfig, dataset: Optional[Dataset] = None,
                   stoplist: Optional[Stoplist] = None,
                   lexicon: Optional[AffectLexicon] = None) -> RunResult:
    dataset, outcomes = collect_outcomes(config, dataset, stoplist, lexicon)
    result = summarize(config, dataset.name, outcomes)
    _log_result(result, config.runs)
    return result


# ==================== СЕТКА МОДЕЛЕЙ И ТАБЛИЦЫ ====================

@dataclass
class GridResult:
    datasets: List[str] = field(default_factory=list)
    models: List[str] = field(default_factory=list)
    results: Dict[Tuple[str, str], RunResult] = field(default_factory=dict)
    configs: Dict[Tuple[str, str], ExperimentConfig] = field(default_factory=dict)

    def add(self, config: ExperimentConfig, result: RunResult):
        if result.dataset not in self.datasets:
            self.datasets.append(result.dataset)
        if result.model_name not in self.models:
            self.models.append(result.model_name)
        self.results[(result.dataset, result.model_name)] = result
        self.configs[(result.dataset, result.model_name)] = config

    def get(self, dataset: str, model: str) -> Optional[RunResult]:
        return self.results.get((dataset, model))


def run_grid(datasets: Sequence[Tuple[Dataset, Tuple[int, int]]], base_config: ExperimentConfig,
             variants=MODEL_VARIANTS, stoplist: Optional[Stoplist] = None,
             lexicon: Optional[AffectLexicon] = None,
             on_outcomes: Optional[Callable[[ExperimentConfig, Dataset, List[RunOutcome]], None]] = None
             ) -> GridResult:
    """
    Варианты модели (по умолчанию все восемь: FDA/SVMs x Topics/Text x ±A)
    на каждом датасете. Без лексикона варианты +A пропускаются, если
    в списке есть другие.
    """
    grid = GridResult()
    stoplist = stoplist or load_stoplist(base_config.stoplist_path)
    if lexicon is None and any(affect for *_, affect in variants):
        if base_config.lexicon_path:
            lexicon = load_lexicon(base_config.lexicon_path)
        elif all(affect for *_, affect in variants):
            raise AffectUnavailableError("Affect feature requested but no lexicon path configured")
        else:
            logger.warning("⚠️ Лексикон не задан, варианты +A пропущены")

    for dataset, split in datasets:
        logger.info("=" * 70)
        logger.info(f"📚 ДАТАСЕТ {dataset.name}: обучение {split[0]} I / {split[1]} L")
        logger.info("=" * 70)
        for classifier, representation, affect in variants:
            if affect and lexicon is None:
                continue
            config = base_config.model_copy(update={
                'classifier': classifier, 'representation': representation,
                'affect': affect, 'split': tuple(split),
            })
            _, outcomes = collect_outcomes(config, dataset, stoplist, lexicon)
            result = summarize(config, dataset.name, outcomes)
            _log_result(result, config.runs)
            grid.add(config, result)
            if on_outcomes is not None:
                on_outcomes(config, dataset, outcomes)
    return grid


def format_table(grid: GridResult) -> str:
    """
    Таблица в раскладке статьи: строка на модель, Prec/Recall/Acc на датасет.
    '*' отмечает лучшую модель датасета по сумме трёх метрик.
    """
    best = {}
    for name in grid.datasets:
        scored = [(grid.get(name, m).mean.total, -i, m)
                  for i, m in enumerate(grid.models) if grid.get(name, m) is not None]
        if scored:
            best[name] = max(scored)[2]

    header = ['Model'] + [f"{name} {col}" for name in grid.datasets for col in ('Prec', 'Recall', 'Acc')]
    lines = ['\t'.join(header)]
    for model in grid.models:
        cells = [model]
        for name in grid.datasets:
            result = grid.get(name, model)
            if result is None:
                cells.extend(['-'] * 3)
                continue
            mark = '*' if best.get(name) == model else ''
            cells.extend(f"{v:.2f}{mark}" for v in
                         (result.mean.precision, result.mean.recall, result.mean.accuracy))
        lines.append('\t'.join(cells))
    return '\n'.join(lines) + '\n'


def write_table(grid: GridResult, path) -> None:
    path = Path(path)
    path.write_text(format_table(grid), encoding='utf-8')
    write_sidecar(grid, path.with_name(path.name + '.json'))


def write_sidecar(grid: GridResult, path) -> None:
    """Полная точность, ключи отсортированы - вывод побайтно воспроизводим."""
    payload = {
        'datasets': {
            name: {model: grid.get(name, model).as_dict()
                   for model in grid.models if grid.get(name, model) is not None}
            for name in grid.datasets
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + '\n', encoding='utf-8')


COMPARISONS = (
    ('topics_vs_text', lambda c: c.representation.value == 'topics',
     lambda c: c.representation.value == 'text'),
    ('text_vs_text_affect', lambda c: c.representation.value == 'text' and not c.affect,
     lambda c: c.representation.value == 'text' and c.affect),
    ('topics_vs_topics_affect', lambda c: c.representation.value == 'topics' and not c.affect,
     lambda c: c.representation.value == 'topics' and c.affect),
)


def aggregate_comparisons(grid: GridResult) -> List[Tuple[str, str, str, float, float]]:
    """Данные сводных графиков: (сравнение, датасет, метрика, первая группа, вторая группа)."""
    rows = []
    for comparison, first, second in COMPARISONS:
        for name in grid.datasets:
            keys = [(k, grid.configs[k]) for k in grid.results if k[0] == name]
            a = [grid.results[k].mean for k, c in keys if first(c)]
            b = [grid.results[k].mean for k, c in keys if second(c)]
            if not a or not b:
                continue
            for metric in ('precision', 'recall', 'accuracy'):
                rows.append((comparison, name, metric,
                             float(np.mean([getattr(m, metric) for m in a])),
                             float(np.mean([getattr(m, metric) for m in b]))))
    return rows


def write_aggregate(rows, path) -> None:
    with Path(path).open('w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['comparison', 'dataset', 'metric', 'first', 'second'])
        for comparison, name, metric, a, b in rows:
            writer.writerow([comparison, name, metric, repr(a), repr(b)])


# ==================== ДАННЫЕ ДЛЯ ГРАФИКОВ ====================

def projection_2d(matrix: TermDocMatrix) -> np.ndarray:
    """
    Координаты документов на двух главных компонентах центрированных столбцов.
    Знак компоненты: наибольшая по модулю нагрузка положительна.
    """
    if matrix.n_docs < 2:
        raise ValueError("At least two documents are required for a projection")
    data = np.asarray(matrix.entries, dtype=float).T
    coords = np.zeros((data.shape[0], 2))
    centered = data - data.mean(axis=0)
    rank = int(np.linalg.matrix_rank(centered)) if centered.size else 0
    n_components = min(2, rank)
    if n_components == 0:
        return coords

    pca = PCA(n_components=n_components, svd_solver='full')
    projected = pca.fit_transform(data)
    for c in range(n_components):
        loadings = pca.components_[c]
        if loadings[int(np.argmax(np.abs(loadings)))] < 0:
            projected[:, c] = -projected[:, c]
    coords[:, :n_components] = projected
    return coords


def write_points(points, path) -> None:
    with Path(path).open('w', encoding='utf-8', newline='\n') as f:
        for x, y in points:
            f.write(f"{x:.6f},{y:.6f}\n")


def arousal_curve(docs: Sequence[Sequence[str]], lexicon: AffectLexicon, mean: float) -> List[float]:
    """Среднее центрированное возбуждение по документам, по возрастанию."""
    context = ArousalContext(mean, lexicon)
    return sorted(document_arousal(doc, context) for doc in docs)


def write_values(values, path) -> None:
    with Path(path).open('w', encoding='utf-8', newline='\n') as f:
        for value in values:
            f.write(f"{value:.6f}\n")


# ==================== СИНТЕТИЧЕСКИЕ ДАННЫЕ ====================

def synthetic_vocabularies(vocab_size_per_class: int, overlap_fraction: float) -> Tuple[List[str], List[str]]:
    idiom_vocab = [f"idi{n:03d}" for n in range(vocab_size_per_class)]
    literal_vocab = [f"lit{n:03d}" for n in range(vocab_size_per_class)]
    shared = int(round(overlap_fraction * vocab_size_per_class))
    literal_vocab[:shared] = idiom_vocab[:shared]
    return idiom_vocab, literal_vocab


def gen_synthetic(n_idiom: int, n_literal: int, vocab_size_per_class: int = 50, doc_len: int = 80,
                  overlap_fraction: float = 0.0, seed: int = 0, paragraphs: int = 3,
                  expression: str = 'blow_whistle', name: str = 'synthetic') -> Dataset:
    """
    Идиоматические контексты из словаря A, литеральные из B; доля overlap_fraction
    термов общая. В средний абзац вставляется целевая фраза.
    """
    if min(n_idiom, n_literal, vocab_size_per_class, doc_len, paragraphs) <= 0:
        raise ValueError("Synthetic corpus parameters must be positive")
    if not 0.0 <= overlap_fraction <= 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    idiom_vocab, literal_vocab = synthetic_vocabularies(vocab_size_per_class, overlap_fraction)
    phrase = expression.split('_')
    target_index = paragraphs // 2

    instances = []
    plan = [(Label.IDIOM, idiom_vocab)] * n_idiom + [(Label.LITERAL, literal_vocab)] * n_literal
    for number, (label, vocab) in enumerate(plan):
        body = []
        for _ in range(paragraphs):
            body.append([vocab[int(i)] for i in rng.integers(len(vocab), size=doc_len)])
        start = int(rng.integers(doc_len + 1))
        body[target_index][start:start] = phrase
        instances.append(Instance(
            id=f"{name}-{number:04d}",
            expression=expression,
            label=label,
            paragraphs=body,
            target_paragraph_index=target_index,
            target_span=(start, start + len(phrase)),
        ))
    return Dataset(name=name, expression=expression, instances=tuple(instances))


def synthetic_lexicon(dataset: Dataset, idiom_range=(5.0, 7.0), literal_range=(2.0, 4.0),
                      seed: int = 0) -> AffectLexicon:
    """
    Нормы для синтетического корпуса: леммы только идиоматических контекстов
    получают возбуждение из idiom_range, только литеральных - из literal_range,
    общие - середину между диапазонами.
    """
    rng = np.random.default_rng(seed)
    seen = {Label.IDIOM: set(), Label.LITERAL: set()}
    for instance in dataset.labeled():
        for paragraph in instance.paragraphs:
            seen[instance.label].update(paragraph)

    neutral = (sum(idiom_range) + sum(literal_range)) / 4.0
    entries = {}
    for lemma in sorted(seen[Label.IDIOM] | seen[Label.LITERAL]):
        in_idiom, in_literal = lemma in seen[Label.IDIOM], lemma in seen[Label.LITERAL]
        if in_idiom and not in_literal:
            arousal = float(rng.uniform(*idiom_range))
        elif in_literal and not in_idiom:
            arousal = float(rng.uniform(*literal_range))
        else:
            arousal = neutral
        entries[lemma] = AffectNorm(5.0, arousal, 5.0)
    return AffectLexicon(entries)

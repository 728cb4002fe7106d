"""
Журнал результатов экспериментов в SQL-базе (SQLAlchemy, пакет shared).
"""
# topspace/ledger.py
import logging
from typing import List, Optional

from sqlalchemy import func, select

from shared import Experiment, RunRecord, init_database, session_scope
from shared.utils import fingerprint

from .config import ExperimentConfig
from .evaluation import RunResult

logger = logging.getLogger(__name__)


class ResultsLedger:
    """
    Сохраняет и читает результаты run_experiment
    """

    def __init__(self, db_url: Optional[str] = None, drop_all: bool = False):
        """
        Args:
            db_url: URL базы (по умолчанию TOPSPACE_DB_URL или sqlite:///topspace.db)
            drop_all: пересоздать таблицы
        """
        self.engine = init_database(drop_all=drop_all, url=db_url)
        logger.debug(f"Журнал результатов: {self.engine.url}")

    def record(self, config: ExperimentConfig, result: RunResult, dataset_name: Optional[str] = None) -> str:
        """
        Записывает эксперимент и его прогоны. Повторная запись той же
        конфигурации заменяет прежние прогоны.

        Returns:
            str: отпечаток конфигурации
        """
        dataset_name = dataset_name or result.dataset
        config_json = config.canonical_json()
        key = fingerprint(f"{dataset_name}\n{config_json}")

        with session_scope() as session:
            experiment = session.execute(
                select(Experiment).where(Experiment.fingerprint == key)
            ).scalar_one_or_none()

            if experiment is None:
                experiment = Experiment(fingerprint=key, dataset=dataset_name,
                                        model_name=result.model_name, config_json=config_json,
                                        precision=0.0, recall=0.0, accuracy=0.0)
                session.add(experiment)
                logger.info(f"✅ Записан эксперимент {result.model_name} / {dataset_name}")
            else:
                experiment.runs.clear()
                session.flush()
                logger.info(f"🔄 Обновлен эксперимент {result.model_name} / {dataset_name}")

            experiment.precision = result.mean.precision
            experiment.recall = result.mean.recall
            experiment.accuracy = result.mean.accuracy
            experiment.runs_count = len(result.per_run)

            skipped = result.skipped or ((),) * len(result.per_run)
            for index, (seed, metrics, confusion, dropped) in enumerate(
                    zip(result.seeds, result.per_run, result.confusions, skipped)):
                experiment.runs.append(RunRecord(
                    run_index=index,
                    seed=str(seed),
                    tp=confusion.tp, fp=confusion.fp, fn=confusion.fn, tn=confusion.tn,
                    precision=metrics.precision,
                    recall=metrics.recall,
                    accuracy=metrics.accuracy,
                    skipped=len(dropped),
                ))
        return key

    def history(self, limit: int = 20) -> List[dict]:
        """Последние эксперименты, новые первыми."""
        with session_scope() as session:
            rows = session.execute(
                select(Experiment).order_by(Experiment.updated_at.desc(), Experiment.id.desc()).limit(limit)
            ).scalars().all()
            return [
                {
                    'fingerprint': row.fingerprint,
                    'dataset': row.dataset,
                    'model': row.model_name,
                    'runs': row.runs_count,
                    'precision': row.precision,
                    'recall': row.recall,
                    'accuracy': row.accuracy,
                    'updated_at': row.updated_at,
                }
                for row in rows
            ]

    def runs(self, key: str) -> List[dict]:
        with session_scope() as session:
            experiment = session.execute(
                select(Experiment).where(Experiment.fingerprint == key)
            ).scalar_one_or_none()
            if experiment is None:
                return []
            return [
                {'run_index': r.run_index, 'seed': int(r.seed), 'tp': r.tp, 'fp': r.fp,
                 'fn': r.fn, 'tn': r.tn, 'accuracy': r.accuracy, 'skipped': r.skipped}
                for r in experiment.runs
            ]

    def get_statistics(self) -> dict:
        with session_scope() as session:
            return {
                'experiments': session.scalar(select(func.count(Experiment.id))) or 0,
                'runs': session.scalar(select(func.count(RunRecord.id))) or 0,
                'datasets': session.scalar(select(func.count(func.distinct(Experiment.dataset)))) or 0,
            }

    def print_statistics(self):
        """Выводит общую статистику"""
        stats = self.get_statistics()

        logger.info("=" * 70)
        logger.info("📊 ЖУРНАЛ РЕЗУЛЬТАТОВ")
        logger.info("=" * 70)
        logger.info(f"Экспериментов: {stats['experiments']}")
        logger.info(f"Прогонов: {stats['runs']}")
        logger.info(f"Датасетов: {stats['datasets']}")

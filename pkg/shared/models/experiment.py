"""Experiment model."""
from typing import List

from sqlalchemy import Float, Index, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import Base
from .mixins import TimestampMixin


class Experiment(TimestampMixin, Base):
    """Один эксперимент: датасет x вариант модели x конфигурация."""
    __tablename__ = 'experiments'

    __table_args__ = (
        Index('ix_experiment_fingerprint', 'fingerprint', unique=True),
        Index('ix_experiment_dataset_model', 'dataset', 'model_name'),
    )

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    fingerprint: Mapped[str] = mapped_column(String(64), nullable=False)
    dataset: Mapped[str] = mapped_column(String(200), nullable=False)
    model_name: Mapped[str] = mapped_column(String(50), nullable=False)
    config_json: Mapped[str] = mapped_column(Text, nullable=False)

    runs_count: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    precision: Mapped[float] = mapped_column(Float, nullable=False)
    recall: Mapped[float] = mapped_column(Float, nullable=False)
    accuracy: Mapped[float] = mapped_column(Float, nullable=False)

    runs: Mapped[List["RunRecord"]] = relationship(
        "RunRecord", back_populates="experiment", cascade="all, delete-orphan",
        order_by="RunRecord.run_index",
    )

    def __repr__(self):
        return f"<Experiment {self.model_name} on {self.dataset} ({self.fingerprint[:8]})>"

"""RunRecord model."""
from sqlalchemy import Float, ForeignKey, Index, Integer, String, UniqueConstraint
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import Base


class RunRecord(Base):
    """Результат одного прогона (одного случайного разбиения)."""
    __tablename__ = 'run_records'

    __table_args__ = (
        UniqueConstraint('experiment_id', 'run_index', name='uq_experiment_run'),
        Index('ix_run_experiment', 'experiment_id'),
    )

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    experiment_id: Mapped[int] = mapped_column(
        Integer, ForeignKey('experiments.id', ondelete='CASCADE'), nullable=False
    )
    run_index: Mapped[int] = mapped_column(Integer, nullable=False)
    # сиды до 2^64 не помещаются в BIGINT со знаком
    seed: Mapped[str] = mapped_column(String(20), nullable=False)

    tp: Mapped[int] = mapped_column(Integer, nullable=False)
    fp: Mapped[int] = mapped_column(Integer, nullable=False)
    fn: Mapped[int] = mapped_column(Integer, nullable=False)
    tn: Mapped[int] = mapped_column(Integer, nullable=False)
    precision: Mapped[float] = mapped_column(Float, nullable=False)
    recall: Mapped[float] = mapped_column(Float, nullable=False)
    accuracy: Mapped[float] = mapped_column(Float, nullable=False)
    skipped: Mapped[int] = mapped_column(Integer, nullable=False, default=0)

    experiment = relationship("Experiment", back_populates="runs")

    def __repr__(self):
        return f"<RunRecord #{self.run_index} acc={self.accuracy:.3f}>"

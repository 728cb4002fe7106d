"""Models package."""
from .experiment import Experiment
from .run_record import RunRecord

__all__ = ['Experiment', 'RunRecord']

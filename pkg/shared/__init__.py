"""Shared database models package."""
from .database import SessionLocal, Base, session_scope, init_database, configure
from .models import Experiment, RunRecord
from . import utils

__all__ = [
    # Database
    'SessionLocal', 'Base', 'session_scope', 'init_database', 'configure',
    # Models
    'Experiment', 'RunRecord',
    # Utils
    'utils'
]

"""Declarative base shared by the ledger models."""
from ..database import Base

__all__ = ['Base']

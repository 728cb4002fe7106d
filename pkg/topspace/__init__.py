"""Idiom vs literal classification in an LDA topic space."""
from .corpus import Dataset, Instance, Label, ContextMode, load_dataset, load_stoplist
from .config import ExperimentConfig, Classifier, Representation
from .topics import LdaConfig
from .evaluation import run_experiment, run_grid, gen_synthetic

__all__ = [
    # Corpus
    'Dataset', 'Instance', 'Label', 'ContextMode', 'load_dataset', 'load_stoplist',
    # Config
    'ExperimentConfig', 'Classifier', 'Representation', 'LdaConfig',
    # Evaluation
    'run_experiment', 'run_grid', 'gen_synthetic',
]

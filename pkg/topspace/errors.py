"""Domain exceptions."""
from typing import Optional


class TopSpaceError(ValueError):
    """Базовая ошибка пакета."""


class CorpusParseError(TopSpaceError):
    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"Corpus line {line_number}: {reason}")


class CorpusValidationError(TopSpaceError):
    def __init__(self, instance_id: Optional[str], reason: str):
        self.instance_id = instance_id
        super().__init__(f"Instance {instance_id!r}: {reason}")


class EmptyDatasetError(TopSpaceError):
    pass


class EmptyVocabularyError(TopSpaceError):
    pass


class EmptyDocumentError(TopSpaceError):
    """Документ пуст после ограничения словарём."""


class InsufficientExamplesError(TopSpaceError):
    def __init__(self, label: str, requested: int, available: int):
        self.label = label
        super().__init__(
            f"Requested {requested} training examples of class {label}, only {available} available"
        )


class DegenerateClassError(TopSpaceError):
    pass


class AlignmentError(TopSpaceError):
    pass


class LexiconFormatError(TopSpaceError):
    def __init__(self, reason: str, line_number: Optional[int] = None):
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"Lexicon {where}{reason}")


class AffectUnavailableError(TopSpaceError):
    pass


class MetricsError(TopSpaceError):
    pass

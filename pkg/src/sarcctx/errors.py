"""Exception hierarchy shared across the pipeline."""


class SarcctxError(Exception):
    pass


class ParseError(SarcctxError):
    """A corpus or prediction line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ValidationError(SarcctxError, ValueError):
    pass


class DomainError(SarcctxError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstructionError(ValidationError):
    """An encoder input cannot be built within the requested budget."""


class EmptyTrainingSetError(ValidationError):
    pass


class UnlabeledRecordError(ValidationError):
    pass


class BudgetExceededError(ValidationError):
    pass


class VocabularyMismatchError(ValidationError):
    pass


class ConfigError(SarcctxError):
    pass

"""Exception hierarchy shared across the toolkit."""


class ConvsegError(Exception):
    """Base class for all toolkit errors."""


class IngestError(ConvsegError):
    """Malformed corpus input. Carries the 1-based line number when known."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DuplicateIdError(IngestError):
    pass


class DocumentBuildError(ConvsegError):
    """Failure while flattening a recipe into a document; names the recipe id."""

    def __init__(self, recipe_id, message):
        super().__init__(f"recipe {recipe_id!r}: {message}")
        self.recipe_id = recipe_id


class SplitError(ConvsegError):
    pass


class SegmenterError(ConvsegError):
    pass


class TrainingError(ConvsegError):
    pass


class MetricError(ConvsegError):
    pass


class EvalMismatchError(ConvsegError):
    """Gold corpus and predictions disagree on document ids."""


class ScorerError(ConvsegError):
    """Base class for external-scorer failures."""


class ScorerTransportError(ScorerError):
    """The scorer could not be reached or the connection failed."""


class ScorerResponseError(ScorerError):
    """The scorer answered with something that is not a valid response object."""


class ScorerCountMismatchError(ScorerError):
    """Probability count differs from the number of candidates sent."""


class ScorerProbabilityError(ScorerError):
    """A returned probability falls outside [0, 1]."""

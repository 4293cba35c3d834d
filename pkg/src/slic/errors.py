"""Exception types shared across the package."""


class SlicError(Exception):
    """Base class for all package errors."""


class IdentityMismatch(SlicError):
    """Records passed to a merge resolve to more than one identity."""


class OverlappingRules(SlicError):
    """Two substitution rules share a pattern but disagree on the replacement."""


class SourceUnavailable(SlicError):
    """A scholarly source could not serve a request."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyVocabulary(SlicError):
    """No term survived cleaning, so a TF-IDF matrix cannot be built."""


class ZeroVector(SlicError):
    """An embedding with zero norm cannot participate in cosine similarity."""


class IncompleteDecisions(SlicError):
    """The review decisions do not cover every cluster exactly once."""


class DimensionError(SlicError):
    """Matrix shapes or rank are incompatible with the requested operation."""


class DegenerateLabels(SlicError):
    """Silhouette needs at least two distinct cluster labels."""


class ParseError(SlicError):
    """Query text could not be parsed.

    Carries the 1-based line/column of the failure and the token set the
    parser would have accepted there.
    """

    def __init__(self, message: str, line: int, column: int, expected=()):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column
        self.expected = tuple(expected)


class UnknownLabel(SlicError):
    """A query references a node label the store does not define."""


class UnknownProperty(SlicError):
    """A query references a property not defined for any label."""


class EmptyStore(SlicError):
    """A nearest-neighbor search was issued against an empty store."""


class EmbeddingDimensionMismatch(SlicError):
    """A vector's dimension differs from the store's fixed dimension."""


class EmptyQuestion(SlicError):
    """The question text is empty."""


class SynthesisFailed(SlicError):
    """Query synthesis produced no parseable query after retries."""


class StepLimitExceeded(SlicError):
    """The agent loop reached its step bound without a final answer."""


class ConfigError(SlicError):
    """The pipeline configuration is invalid."""


class OutputExists(SlicError):
    """Pipeline outputs already exist and --force was not given."""

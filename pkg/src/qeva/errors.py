"""Exception hierarchy shared across the package.

Two broad families matter for the CLI exit-code contract: validation
failures (bad inputs, degenerate samples) exit 1, backend failures
(transport, capability, missing fixtures) exit 2.
"""


class QevaError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(QevaError):
    """Invalid input data or configuration. CLI exit code 1."""


class BackendError(QevaError):
    """Model-invocation failure. CLI exit code 2."""


# --- validation family ---------------------------------------------------


class SchemaError(ValidationError):
    """A record failed JSON parsing or field validation."""


class ReferentialError(ValidationError):
    """A record references an id that does not exist in the dataset."""


class MissingAnnotation(ValidationError):
    """Summaries lack annotations for a requested criterion."""

    def __init__(self, summary_ids, criterion):
        self.summary_ids = list(summary_ids)
        self.criterion = criterion
        super().__init__(
            f"no {criterion} annotations for summaries: {', '.join(self.summary_ids)}"
        )


class DegenerateSample(ValidationError):
    """A paired sample on which the requested statistic is undefined."""


class InsufficientData(ValidationError):
    """Too few multiply-annotated items to compute agreement."""


class EmptyDimension(ValidationError):
    """No graded answers for a dimension; its score is undefined."""


class EmptyInput(ValidationError):
    """A baseline metric received an empty token sequence."""


class TimelineTooShort(ValidationError):
    """Fewer than two distinct events extracted from the video."""


class ConfigError(ValidationError):
    """Malformed or incomplete run configuration."""


# --- backend family -------------------------------------------------------


class CapabilityError(BackendError):
    """A video-conditioned request was sent to a text-only backend."""


class TransportError(BackendError):
    """HTTP failure that survived the retry budget."""


class AuthError(BackendError):
    """401/403 from the remote endpoint; never retried."""


class ProtocolError(BackendError):
    """Response body did not match the chat-completion wire format."""


class FixtureMiss(BackendError):
    """Replay-mode request whose hash is absent from the fixture store."""


class GenerationEmpty(BackendError):
    """The model produced zero parseable items after the retry."""

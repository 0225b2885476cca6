"""Exception hierarchy shared by every pipeline stage."""


class OntoTampError(Exception):
    """Base class for all errors raised by the package."""


class ParseError(OntoTampError):
    """Malformed input text (KB lines, scene files, plans)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(OntoTampError):
    """Well-formed triples that violate the knowledge-base schema."""


class AmbiguityError(OntoTampError):
    """More than one ActionPriority rule matched a lookup."""


class TaggingError(OntoTampError):
    pass


class NoTaskFound(TaggingError):
    pass


class EmptyObjects(TaggingError):
    pass


class InvariantError(OntoTampError):
    """A world state broke one of its structural invariants."""


class PreconditionError(OntoTampError):
    """An action cannot be applied to the current world state.

    ``reason`` is a short machine-readable phrase that is copied verbatim
    into the planner feedback.
    """

    def __init__(self, reason, detail=None):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason} ({detail})" if detail else reason)


class TemplateError(OntoTampError):
    pass


class BackendError(OntoTampError):
    """Any failure while asking a planner backend for text."""


class BackendTimeoutError(BackendError):
    pass


class TransportError(BackendError):
    pass


class AuthError(BackendError):
    pass


class MockError(BackendError):
    pass


class ConfigError(OntoTampError):
    pass


class InvalidTrials(OntoTampError):
    pass

"""Exception types shared across the toolkit."""


class ContractViolation(ValueError):
    """An operation was called with arguments that break its contract."""


class SizingError(ContractViolation):
    """A collection is too small (or empty) for the requested operation."""


class ParseError(ValueError):
    """An input file could not be parsed; the message names the line."""


class AlignmentError(ParseError):
    """Two parallel files disagree on line count; the message names both."""


class TransportError(RuntimeError):
    """A remote call failed after exhausting retries.

    ``chunk_indices`` holds the positions (into the original text list) of
    the chunk that could not be translated.
    """

    def __init__(self, message: str, chunk_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.chunk_indices = chunk_indices


class ProtocolError(RuntimeError):
    """A remote service answered with a malformed payload."""


class NotFoundError(LookupError):
    """A referenced session or item does not exist."""


class ConflictError(RuntimeError):
    """The request clashes with existing state (e.g. duplicate session)."""

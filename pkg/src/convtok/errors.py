"""Exception types shared across the toolkit."""


class ConvtokError(Exception):
    """Base class for all toolkit errors."""


class MalformedRecord(ConvtokError):
    """A corpus line violates the expected schema. Carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InvalidEncoding(ConvtokError):
    """Input bytes or text are not valid UTF-8."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptyCorpus(ConvtokError):
    """An operation that needs at least one record or document got none."""


class ConfigError(ConvtokError):
    """A training configuration is internally inconsistent or infeasible."""


class CorpusTooLarge(ConvtokError):
    """The reference trainer refuses corpora beyond its guard limit."""


class IdOutOfRange(ConvtokError):
    """A token id does not index into the model vocabulary."""


class InvalidByteSequence(ConvtokError):
    """Decoded bytes do not form valid UTF-8."""


class FormatVersionMismatch(ConvtokError):
    """A model file declares an unsupported format version."""


class IntegrityError(ConvtokError):
    """A model violates its structural invariants (duplicate vocab, dangling merge, ...)."""


class NoWords(ConvtokError):
    """Fertility is undefined on text with zero words."""


class EmptyText(ConvtokError):
    """Token reduction is undefined when a token count is zero."""

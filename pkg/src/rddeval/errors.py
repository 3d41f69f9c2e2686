"""Exception hierarchy shared by all rddeval modules.

Two families matter for the CLI exit-code contract: ``UsageError`` (bad
flags, bad config, exit 1) and ``DataError`` (corrupt or inconsistent
input data, exit 2).
"""


class RddEvalError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(RddEvalError):
    """Invalid flags, options, or configuration."""


class EmptyEnsemble(UsageError):
    """Fusion was requested with zero model detection sets."""


class DuplicateName(UsageError):
    """A comparison table was given two rows with the same name."""


class DataError(RddEvalError):
    """Invalid or inconsistent input data."""


class MalformedXml(DataError):
    """Annotation XML is missing required structure or is not well-formed."""


class UnknownClass(DataError):
    """An annotation carries a label outside the damage-class taxonomy (strict mode)."""


class InvalidBox(DataError):
    """Box coordinates are degenerate, inverted, negative, or non-finite."""


class ParseError(DataError):
    """A detection file line could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfidenceOutOfRange(DataError):
    """A confidence value falls outside [0, 1]."""


class MixedImageIds(DataError):
    """A per-image operation received boxes from more than one image."""

"""Exception hierarchy shared across the package."""


class OmrError(Exception):
    """Base class for all errors raised by this package."""


class InputFormatError(OmrError):
    """An input image or stream could not be decoded."""


class DetectionParseError(OmrError):
    """A detection record could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DetectionValidationError(OmrError):
    """A parsed detection record violates a field constraint."""


class ConfigError(OmrError):
    """A configuration value is out of range or incomplete."""


class AlignmentError(OmrError):
    """Measure boxes could not be organized into rows."""


class DetectorError(OmrError):
    """An external detector process failed or produced invalid output."""

"""Shared exception types; the CLI maps these onto exit codes."""


class DataError(ValueError):
    """Malformed or inconsistent input data (exit code 2)."""


class GoldParseError(DataError):
    """A gold segmentation file violates the documented format."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class PatternError(DataError):
    """A derivational pattern cannot be compiled or applied."""


class EndpointError(RuntimeError):
    """The model endpoint failed in a way that aborts the run (exit code 3)."""


class AuthenticationError(EndpointError):
    """The endpoint rejected our credentials; retrying cannot help."""

"""Exception types shared across the package."""


class DegenerateError(RuntimeError):
    """A numerically degenerate situation that is not a caller mistake."""


class DegenerateInputError(DegenerateError):
    """Input data leaves nothing to work with (e.g. every term truncated)."""


class DegenerateSpectrumError(DegenerateError):
    """Eigengap too small to identify the requested invariant subspace."""


class GenerationError(RuntimeError):
    """Random instance generation failed its own acceptance condition."""


class FileFormatError(ValueError):
    """Malformed input file; carries the offending location.

    ``line`` is 1-based for text formats, ``offset`` is a byte offset for
    binary formats; either may be None.
    """

    def __init__(self, message, *, line=None, offset=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"byte offset {offset}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.offset = offset

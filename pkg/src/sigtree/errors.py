"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, data and file
format errors exit 2, internal invariant violations exit 3.
"""


class SigtreeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(SigtreeError):
    """Bad command-line arguments or argument combinations."""


class DataError(SigtreeError):
    """Input data violates a documented contract."""


class FormatError(DataError):
    """A file does not conform to its on-disk format."""


class MagicError(FormatError):
    """File does not start with the expected magic bytes."""


class VersionError(FormatError):
    """File carries an unsupported format version."""


class TruncatedError(FormatError):
    """File ended in the middle of a header or record."""


class ParseError(FormatError):
    """A text line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateDocIdError(DataError):
    """The same document identifier appeared more than once."""


class DimensionMismatchError(DataError):
    """Signatures of different bit widths were combined."""


class InsufficientDataError(DataError):
    """Too few data points for the requested tree order."""


class EmptyTreeError(DataError):
    """Every branch of the tree is empty (no data points inserted)."""


class CoverageError(DataError):
    """Too many judged documents are missing from the clustering."""


class InvariantError(SigtreeError):
    """An internal consistency check failed; indicates a bug."""

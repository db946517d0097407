"""Exception types shared across the toolkit.

Every error class carries a distinct process exit code so shell callers
can tell failure modes apart; the CLI prints the full mapping in --help.
"""


class ToolError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class EmptyMatrixError(ToolError):
    """Matrix has zero rows or zero columns."""

    exit_code = 3


class ShapeMismatchError(ToolError):
    """Array dimensions disagree with what the operation requires."""

    exit_code = 4


class NonFiniteError(ToolError):
    """A NaN or infinity was found where finite values are required."""

    exit_code = 5

    def __init__(self, flat_index: int, context: str = "matrix"):
        self.flat_index = int(flat_index)
        super().__init__(f"non-finite value in {context} at flat index {flat_index}")


class ZeroNormRowError(ToolError):
    """Cosine distance is undefined for an all-zero feature row."""

    exit_code = 6

    def __init__(self, row: int):
        self.row = int(row)
        super().__init__(f"feature row {row} has zero norm; cosine distance undefined")


class ParamsTooLargeError(ToolError):
    """Neighbor expansion parameters exceed the number of items."""

    exit_code = 7


class DegenerateSimilarityError(ToolError):
    """All similarity entries equal; min-max scaling is undefined."""

    exit_code = 8


class IndexOutOfRangeError(ToolError):
    """An item index falls outside the matrix it addresses."""

    exit_code = 9


class BadMagicError(ToolError):
    """File does not start with the expected magic bytes."""

    exit_code = 10


class UnsupportedVersionError(ToolError):
    """File carries a format version this reader does not understand."""

    exit_code = 11


class TruncatedFileError(ToolError):
    """File size disagrees with the size implied by its header."""

    exit_code = 12


class DuplicateIndexError(ToolError):
    """Metadata lists the same item index more than once."""

    exit_code = 13

    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"duplicate item index {index} in metadata")


class UnknownRoleError(ToolError):
    """Metadata role is neither 'query' nor 'gallery'."""

    exit_code = 14

    def __init__(self, role: str):
        self.role = role
        super().__init__(f"unknown role {role!r}; expected 'query' or 'gallery'")


class IndexGapError(ToolError):
    """Metadata item indexes do not cover 0..N-1 exactly."""

    exit_code = 15


class NoValidQueriesError(ToolError):
    """Every query was skipped; no metric can be reported."""

    exit_code = 16


class BadParamsError(ToolError):
    """Parameter values violate their documented constraints."""

    exit_code = 17


class TooLargeForOracleError(ToolError):
    """Input exceeds the size the brute-force oracle is willing to run."""

    exit_code = 18

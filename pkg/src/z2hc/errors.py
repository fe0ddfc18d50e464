"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class Z2HCError(Exception):
    exit_code = 2


class GraphFormatError(Z2HCError, ValueError):
    """Malformed graph file; ``line`` is the 1-based offending line (0 if unknown)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class InvalidArgumentError(Z2HCError, ValueError):
    exit_code = 2


class PreconditionError(Z2HCError, ValueError):
    exit_code = 2


class ResourceLimitError(Z2HCError, MemoryError):
    exit_code = 3


class NumericError(Z2HCError, ArithmeticError):
    exit_code = 4

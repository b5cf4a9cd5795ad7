"""Exception types shared across the package.

Every error that can surface through the command line carries a stable
machine-readable ``code`` so batch harnesses can dispatch on it.
"""


class SplincalError(Exception):
    code = "INTERNAL"
    exit_code = 1

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ParseError(SplincalError):
    code = "PARSE_ERROR"
    exit_code = 2

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.line = line
        self.col = col


class PreconditionError(SplincalError):
    """An algebraic precondition was violated (exit code 3)."""

    code = "PRECONDITION"
    exit_code = 3


class RingMismatchError(PreconditionError):
    code = "RING_MISMATCH"


class ExponentOverflowError(PreconditionError):
    code = "EXPONENT_OVERFLOW"


class OutOfScopeError(SplincalError):
    """A computation the tool deliberately does not attempt (exit code 4)."""

    code = "OUT_OF_SCOPE"
    exit_code = 4

"""Exception types shared across the package."""


class DhError(Exception):
    """Base class for all dhsim errors."""


class SizeMismatchError(DhError):
    """Operands act on different numbers of qubits."""


class BudgetError(DhError):
    """A term-count or dense-size budget was exceeded."""


class ParseError(DhError):
    """Circuit text could not be parsed.

    Carries the 1-based ``line`` and ``column`` of the offending token.
    """

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class BindingError(DhError):
    """A parameter binding is missing, non-finite, or names an undeclared symbol."""


class GaugeError(DhError):
    """A gauge unitary does not stabilize the standard initial state."""


class InvariantError(DhError):
    """An internal consistency check failed (signals a bug, not bad input)."""

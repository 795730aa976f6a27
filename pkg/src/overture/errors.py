"""Exception types shared across the workbench."""


class OvertureError(Exception):
    """Base class for all workbench errors."""


class ParseError(OvertureError):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            msg = f"line {line}, col {col}: {msg}"
        super().__init__(msg)


class ValidationError(OvertureError):
    """Raised when an operation requires a protocol that fails validation."""


class EvalError(OvertureError):
    """Runtime error during protocol execution (unbound variable, bad owner)."""


class MetaEvalError(OvertureError):
    """Runtime error during metalanguage evaluation."""


class UsageError(OvertureError):
    """Caller misuse: mismatched moduli, bad variable sets, malformed queries."""


class BudgetError(OvertureError):
    """Enumeration would exceed the configured budget."""


class StratificationError(OvertureError):
    """Logic program references an atom before its defining stratum."""

"""Exception hierarchy shared by the library and the command line."""


class PolarForgeError(Exception):
    """Base class for every error raised on purpose by PolarForge."""


class ValidationError(PolarForgeError, ValueError):
    """Input rejected before any work starts (bad field, matrix, file, flag)."""

    def __init__(self, message: str, line: int = None, source: str = None):
        self.line = line
        self.source = source
        prefix = ""
        if source is not None:
            prefix += f"{source}:"
        if line is not None:
            prefix += f"{line}: "
        elif prefix:
            prefix += " "
        super().__init__(f"{prefix}{message}")


class BudgetExceededError(PolarForgeError, RuntimeError):
    """A node, trial or enumeration budget would be exceeded."""


class InfeasibleTargetError(PolarForgeError, ValueError):
    """A requested (beta', mu') target or template precondition cannot be met."""


class InvariantViolation(PolarForgeError, AssertionError):
    """A certificate, partition identity or conservation check failed."""

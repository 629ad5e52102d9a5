"""Exception hierarchy shared across the package."""


class AddcombError(Exception):
    """Base class for all package errors."""


class InvalidContextError(AddcombError):
    """Malformed group context (e.g. modulus < 2)."""


class ContextMismatchError(AddcombError):
    """Two operands live in different group contexts."""


class InvalidSetError(AddcombError):
    """Set input rejected (out-of-range element, bad JSON, ...)."""


class FieldRequiredError(AddcombError):
    """Operation needs a prime modulus (field) context."""


class DomainError(AddcombError):
    """Input outside the operation's domain (e.g. division by zero)."""


class OverflowLimitError(AddcombError):
    """A computed value would exceed the guaranteed 128-bit range."""


class BudgetExceededError(AddcombError):
    """Estimated work exceeds the configured step budget.

    Carries the estimate so callers can report the refusal.
    """

    def __init__(self, estimate: int, budget: int, what: str = ""):
        self.estimate = estimate
        self.budget = budget
        self.what = what
        msg = f"work estimate {estimate} exceeds budget {budget}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)


class SymmetryError(AddcombError):
    """Matrix construction would not be symmetric (odd weight function)."""


class ConvergenceError(AddcombError):
    """Iterative eigen-solver failed to reach the requested residual."""

    def __init__(self, residual: float, sweeps: int):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(f"no convergence after {sweeps} sweeps (residual {residual:.3e})")


class ParameterError(AddcombError):
    """Invalid generator / CLI parameter."""

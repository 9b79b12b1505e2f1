"""Exception hierarchy shared by all modules."""


class NRBlockadeError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(NRBlockadeError, ValueError):
    """Invalid user-supplied model, truncation, sweep or config document.

    ``messages`` holds every problem found, so callers can report them all at
    once instead of fixing one error per run.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class UsageError(NRBlockadeError, ValueError):
    """An API was called with inconsistent arguments (e.g. wrong drive port)."""


class SolverError(NRBlockadeError, RuntimeError):
    """Steady-state solve failed or produced an unphysical state."""

    def __init__(self, message, kernel_dimension=None):
        self.kernel_dimension = kernel_dimension
        super().__init__(message)


class IntegratorError(NRBlockadeError, RuntimeError):
    """Time integration exceeded its error or trace-drift budget."""


class OracleError(NRBlockadeError, RuntimeError):
    """The weak-drive perturbative oracle hit a singular linear system."""


class EliminationError(NRBlockadeError, ValueError):
    """Adiabatic elimination requested outside its validity regime."""


class UndefinedCorrelationError(NRBlockadeError, ArithmeticError):
    """g2(0) requested for an output mode with (numerically) zero population."""

"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Malformed argument: wrong shape, non-Hermitian, parameter out of range."""


class DomainViolation(ValueError):
    """An operand that must be positive definite is not."""


class NumericalFailure(RuntimeError):
    """An iterative kernel did not converge within its budget."""


class NonConvergence(RuntimeError):
    """The tau optimizer exhausted its budget.

    The partially converged report is attached as ``report`` so callers can
    still inspect the best value found.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

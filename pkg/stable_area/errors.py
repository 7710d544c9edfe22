"""Exception hierarchy shared by every numerical module.

Each error carries the module it came from so the CLI and the HTTP layer can
report provenance (``error [wright]: ...``).
"""


class NumericalError(Exception):
    exit_code = 3

    def __init__(self, module: str, detail: str):
        super().__init__(f"[{module}] {detail}")
        self.module = module
        self.detail = detail


class InvalidInput(NumericalError, ValueError):
    exit_code = 2


class NonConvergence(NumericalError):
    pass


class PoleError(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class InversionUnstable(NumericalError):
    pass


class HorizonExceeded(NumericalError):
    pass


class RejectionBudgetExceeded(NumericalError):
    pass


class DegenerateWeights(NumericalError):
    pass


class InsufficientTail(NumericalError):
    pass


class PrecisionLoss(UserWarning):
    """Cancellation in a recurrence ate more than half the working precision."""

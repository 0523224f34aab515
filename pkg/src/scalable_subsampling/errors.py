"""Exception hierarchy.

The CLI maps these onto exit codes: invalid input -> 2, infeasible tuning -> 3,
numerical failure -> 4.
"""


class SubsamplingError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidInputError(SubsamplingError, ValueError):
    exit_code = 2


class InvalidSchemeError(InvalidInputError):
    """Block length / offset combination that cannot form a block family."""


class InsufficientBlocksError(InvalidInputError):
    """Too few blocks for the requested estimate (e.g. a variance from q = 1)."""


class InfeasibleTuningError(SubsamplingError, ValueError):
    """Rate exponents or constants admit no valid (b, h)."""

    exit_code = 3


class BiasDominatedError(InfeasibleTuningError):
    """The CLT interval does not apply because the block bias is not negligible.

    Use the two-level subsampling interval instead.
    """


class NumericalFailureError(SubsamplingError, ArithmeticError):
    exit_code = 4


class NonConvergenceError(NumericalFailureError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class StatisticEvaluationError(NumericalFailureError):
    """A statistic failed on one block; carries the 1-based block index."""

    def __init__(self, block, cause):
        super().__init__(f"statistic failed on block {block}: {cause}")
        self.block = block
        self.cause = cause

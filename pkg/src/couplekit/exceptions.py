"""Exception hierarchy for couplekit."""


class CoupleError(ValueError):
    """Invalid couple data."""


class DimensionMismatchError(CoupleError):
    pass


class NonpositiveWeightError(CoupleError):
    pass


class ExponentRangeError(CoupleError):
    pass


class CurveError(ValueError):
    """Invalid concave curve data or an invalid evaluation point."""


class InadmissibleCurveError(CurveError):
    """A curve fails one clause of an admissibility test.

    The failing clause is kept on ``clause`` so callers can report it.
    """

    def __init__(self, clause, message=None):
        self.clause = clause
        super().__init__(message or clause)


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class DominationError(PreconditionError):
    """K(t, b) <= K(t, a) fails; ``witness_t`` is a violating parameter."""

    def __init__(self, witness_t, message=None):
        self.witness_t = witness_t
        super().__init__(message or f"domination violated at t={witness_t!r}")


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before certifying its tolerance.

    ``lower`` and ``upper`` bracket the true optimum.
    """

    def __init__(self, lower, upper, message=None):
        self.lower = lower
        self.upper = upper
        super().__init__(message or f"no convergence: optimum in [{lower!r}, {upper!r}]")


class UnsupportedOperationError(NotImplementedError):
    pass

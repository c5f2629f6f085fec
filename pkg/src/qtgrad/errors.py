class UndefinedStepsizeError(ValueError):
    """A stepsize formula hit a zero denominator."""


class NotPositiveDefiniteError(ValueError):
    """A curvature check found a nonpositive quadratic form."""


class LineSearchError(RuntimeError):
    """Backtracking failed to find an acceptable step."""


class InfeasibleConstraintError(ValueError):
    """The feasible set is empty or the projection could not be bracketed."""

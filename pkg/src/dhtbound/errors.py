"""Exception hierarchy shared by the library and the command line runner."""


class ValidationError(ValueError):
    """Invalid input: bad shapes, non-normalized tables, violated preconditions."""


class EvaluationError(RuntimeError):
    """A bound could not be evaluated (all candidate points indeterminate, etc.)."""


class IndeterminateError(EvaluationError):
    """An expression reduced to infinity minus infinity."""

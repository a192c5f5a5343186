"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all chaincoop errors."""


class InvalidSubVectorError(EngineError):
    """A sub-vector references dimensions or codes outside its layout."""


class InvalidParameterError(EngineError):
    """A configuration parameter is out of its legal range."""


class InsufficientDataError(EngineError):
    """Too few distinct points to fit a surrogate."""


class DimensionMismatchError(EngineError):
    """Vector dimensionality does not match the model or segment."""


class NoNextSegmentError(EngineError):
    """Asked for the overlap partition of the last segment."""


class StaleStateError(EngineError):
    """A propagated-state handle is unknown or not valid for this segment."""


class EvaluatorIOError(EngineError):
    """The external evaluator process failed or broke protocol."""


class BudgetExhausted(EngineError):
    """Signal raised once the evaluation budget is spent.

    Raised after the current phase has committed its best candidate, so
    callers can unwind to the top of the run loop and return the incumbent.
    """

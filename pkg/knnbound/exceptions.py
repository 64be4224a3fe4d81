"""Exception types raised by knnbound."""


class ParameterError(ValueError):
    """A parameter violates a precondition (sizes, probabilities, permutations, k parity)."""


class ContextStateError(RuntimeError):
    """An operation needs state the neighbor context was not built with."""

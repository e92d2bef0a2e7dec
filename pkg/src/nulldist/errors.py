"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Structurally bad input: wrong shapes, NaNs, inconsistent indices."""


class ParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class DisconnectedGraphError(InvalidInputError):
    """Raised when a graph metric is requested on a disconnected graph.

    Carries the vertex components so callers can report them.
    """

    def __init__(self, components):
        self.components = [sorted(c) for c in components]
        super().__init__(
            f"graph is disconnected; components: {self.components}"
        )


class SizeBoundError(ValueError):
    """An exhaustive computation was refused because the instance is too large."""


class ModelConstraintError(ValueError):
    """Side lengths violate the admissibility constraints of a model plane."""


class UndefinedAngleError(ValueError):
    """Comparison angle is undefined (a degenerate zero-length side)."""


class UnsupportedRegimeError(ValueError):
    """Model-space query outside the supported chart; no value is returned."""

"""Exception types raised by the library."""


class TableMovesError(Exception):
    """Base class for all library errors."""


class ValidationError(TableMovesError, ValueError):
    """Input data violates a documented precondition."""


class NegativeEntry(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"negative entry {value!r} at {index}")


class MarginMismatch(ValidationError):
    """A table's margin differs from the prescribed one.

    ``axis`` is 0 for row sums, 1 for column sums (2 for the third margin of a
    three-way table); ``index`` is the worst offending position.
    """

    def __init__(self, axis, index, residual):
        self.axis = axis
        self.index = index
        self.residual = residual
        super().__init__(
            f"margin {axis} mismatch at index {index}: residual {residual:.3e}"
        )


class DimensionMismatch(ValidationError):
    pass


class NotAProbability(ValidationError):
    pass


class DegenerateIndices(ValidationError):
    pass


class NotAMove(ValidationError):
    pass


class NotSimple(ValidationError):
    pass


class InvalidInterval(ValidationError):
    pass


class NotMetric(ValidationError):
    pass


class NonConvergence(TableMovesError, RuntimeError):
    """An iterative procedure hit its iteration cap."""


class InputError(ValidationError):
    """A problem or config file is malformed; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

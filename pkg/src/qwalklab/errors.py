"""Exception types shared across the toolkit."""


class QwalkError(Exception):
    """Base class for all toolkit errors."""


class InvalidSizeError(QwalkError):
    """A requested graph or state size is out of the supported range."""


class InvalidEdgeError(QwalkError):
    """An edge list contains a self-loop or a duplicate edge."""


class OutOfRangeError(QwalkError):
    """A vertex or label index does not exist on the given substrate."""


class InvalidParameterError(QwalkError):
    """A scalar parameter violates its documented range or combination."""


class DimensionMismatchError(QwalkError):
    """Operator, state and substrate dimensions do not agree."""


class ResourceLimitError(QwalkError):
    """A computation would exceed the configured amplitude budget."""

    def __init__(self, required: int, budget: int, what: str = "amplitudes"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"resource limit exceeded: {what} required {required} > budget {budget}"
        )


class NumericalFailureError(QwalkError):
    """An evolution routine failed to reach its accuracy target."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (achieved residual {residual:.3e})")


class UnsupportedMetricError(QwalkError):
    """A metric was requested on a distribution that cannot support it."""


class IncompatibleDistributionsError(QwalkError):
    """Two distributions do not share a common label set."""

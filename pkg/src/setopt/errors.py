"""Exception hierarchy shared across the solver modules."""


class SetOptError(Exception):
    """Base class for all errors raised by setopt."""


class DimensionMismatch(SetOptError, ValueError):
    pass


class ConeError(SetOptError, ValueError):
    """Raised when a dual-row description does not define a valid ordering cone."""


class NotSolid(ConeError):
    pass


class NotPointed(ConeError):
    pass


class ZeroRow(ConeError):
    pass


class NonFiniteValue(SetOptError, FloatingPointError):
    def __init__(self, selection: int, what: str = "value"):
        super().__init__(f"selection {selection} produced a non-finite {what}")
        self.selection = selection


class UnknownInstance(SetOptError, KeyError):
    pass


class CapExceeded(SetOptError):
    """The partition set has more tuples than the configured cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"partition set has {size} tuples, cap is {cap}")
        self.size = size
        self.cap = cap


class NonConvergence(SetOptError, ArithmeticError):
    """Wolfe's min-norm-point iteration did not satisfy its optimality test."""

    def __init__(self, z, weights, residual: float, iterations: int, message: str | None = None):
        super().__init__(
            message
            or f"min-norm-point did not converge after {iterations} iterations "
            f"(criterion residual {residual:.3e})"
        )
        self.z = z
        self.weights = weights
        self.residual = residual
        self.iterations = iterations


class NotStationary(SetOptError):
    pass


class LineSearchFailed(SetOptError, ArithmeticError):
    pass


class UnsupportedDimension(SetOptError, ValueError):
    pass

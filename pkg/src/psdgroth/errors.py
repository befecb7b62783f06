"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Argument outside an operation's domain."""


class FormatError(ValueError):
    """A matrix or graph file could not be parsed."""


class DegenerateInstance(ArithmeticError):
    """The requested quantity is undefined for this instance (e.g. zero SDP value)."""


class NumericalError(ArithmeticError):
    """A numerical gate failed (quadrature convergence, inner product out of range)."""


class TooLarge(ValueError):
    """Exhaustive search budget exceeded."""

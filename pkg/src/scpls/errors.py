"""Exception types raised by the solver library."""


class InvalidArgument(ValueError):
    """Input violates a documented precondition (shape, sign, feasibility)."""


class UnsupportedConfiguration(ValueError):
    """Valid input that this library deliberately does not handle."""


class ConstraintQualificationError(ArithmeticError):
    """A linearized constraint degenerated to an empty-interior ball.

    Happens only when ``g_i(x) = 0`` and ``grad g_i(x) = 0`` simultaneously,
    which MFCQ rules out.
    """


class InvalidInstance(ValueError):
    """Generated or loaded problem data fails a structural check."""


class NumericalFailure(RuntimeError):
    """An iterative procedure hit its iteration cap.

    ``payload`` carries whatever state is useful for post-mortem inspection
    (last bracket of a root finder, last moduli of a line search, ...).
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = dict(payload or {})

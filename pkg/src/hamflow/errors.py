"""Exception hierarchy shared by all hamflow modules."""


class HamflowError(Exception):
    pass


class ExprError(HamflowError):
    pass


class LexError(ExprError):
    def __init__(self, char, offset):
        super().__init__(f"unexpected character {char!r} at offset {offset}")
        self.char = char
        self.offset = offset


class ParseError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name, offset, chart=None):
        where = f" (chart coordinates: {', '.join(chart.coordinates)})" if chart else ""
        super().__init__(f"unknown identifier {name!r} at offset {offset}{where}")
        self.name = name
        self.offset = offset


class DomainError(ExprError, ArithmeticError):
    """Raised when evaluation leaves the real domain of an operation."""

    def __init__(self, message, expr):
        super().__init__(f"{message} in {expr}")
        self.expr = expr


class ChartMismatchError(HamflowError, ValueError):
    pass


class NonZeroDtError(HamflowError, ValueError):
    pass


class SingularMassMatrixError(HamflowError, ArithmeticError):
    pass


class NewtonDivergenceError(HamflowError, ArithmeticError):
    pass


class NonIntegrableTrajectoryError(HamflowError, ValueError):
    pass


class NonFiniteStateError(HamflowError, ArithmeticError):
    def __init__(self, message, time, last_state):
        super().__init__(message)
        self.time = time
        self.last_state = last_state

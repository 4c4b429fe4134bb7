"""Exception hierarchy shared by every jetforge module."""


class JetforgeError(Exception):
    """Base class for all library errors."""


class ExprSyntaxError(JetforgeError, ValueError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            message = f"{message} at position {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class UnknownSymbol(JetforgeError, ValueError):
    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"unknown symbol {name!r}{where}")


class NegativeBaseFractionalPower(JetforgeError, ValueError):
    """A fractional exponent was applied to a base not known to be positive-definite."""


class UnsupportedOperation(JetforgeError, ValueError):
    pass


class DomainError(JetforgeError, ArithmeticError):
    """A mathematically undefined evaluation (pole, singular jet, irrational value)."""


class DivisionByZero(DomainError, ZeroDivisionError):
    pass


class IrrationalValue(DomainError):
    pass


class SingularLinearPart(DomainError):
    pass


class BasePointMismatch(JetforgeError, ValueError):
    pass


class OrderMismatch(JetforgeError, ValueError):
    pass


class NumericOverflow(DomainError, OverflowError):
    pass


class PrerequisiteNotAutomorphism(DomainError):
    pass


class DegenerateFlag(DomainError):
    pass


class AllSamplesSingular(DomainError):
    pass


class BracketClosureViolation(JetforgeError, ValueError):
    pass


class ProblemValidationError(JetforgeError, ValueError):
    """Problem file does not match the schema; ``pointer`` is a JSON pointer,
    or None when the file itself could not be read."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(message if pointer is None else f"{pointer or '/'}: {message}")

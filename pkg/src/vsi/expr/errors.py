"""Exceptions raised by the expression layer."""


class ExprError(Exception):
    pass


class ParseError(ExprError, ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = "") -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownIdentifierError(ParseError):
    pass


class PoleError(ExprError, ZeroDivisionError):
    """A denominator vanished at an evaluation point."""


class MissingAssignmentError(ExprError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing assignment"

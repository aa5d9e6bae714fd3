"""Exception hierarchy shared by all curvlab modules."""

from __future__ import annotations


class CurvlabError(Exception):
    """Base class for every error raised by curvlab."""


class InvalidInput(CurvlabError, ValueError):
    pass


class CoincidentError(CurvlabError, ValueError):
    """Two or more points of a triple coincide."""


class CollinearError(CurvlabError, ValueError):
    """The triple is collinear where a genuine triangle is required."""


class SingularityError(CurvlabError, ZeroDivisionError):
    """A kernel was evaluated on the diagonal w == z."""


class ParseError(CurvlabError, ValueError):
    """Syntax error in an h-expression.

    ``offset`` is the byte offset (UTF-8) of the offending token and
    ``expected`` the set of token descriptions that would have been accepted.
    """

    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class EvalError(CurvlabError, ArithmeticError):
    """Domain violation while evaluating an expression node."""

    def __init__(self, message: str, node=None):
        self.node = node
        super().__init__(message)


class SearchExhausted(CurvlabError, RuntimeError):
    """The sign-change search ran out of budget; ``partial`` holds its state."""

    def __init__(self, message: str, partial: dict | None = None):
        self.partial = partial or {}
        super().__init__(message)

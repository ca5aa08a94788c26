"""Exception hierarchy.

Every error raised by the package derives from :class:`TSGError`, so callers
(the CLI in particular) can map the whole family to an input-error exit code.
"""

from __future__ import annotations


class TSGError(Exception):
    """Base class for all package errors."""


# -- time scales ---------------------------------------------------------------

class NonMonotonic(TSGError):
    pass


class TooFewPoints(TSGError):
    pass


class BadParameter(TSGError):
    pass


class NotInScale(TSGError, KeyError):
    def __init__(self, t, scale=None):
        self.t = t
        msg = f"{t!r} is not a point of the time scale"
        if scale is not None:
            msg += f" ({scale})"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class ReversedRange(TSGError):
    pass


# -- calculus ------------------------------------------------------------------

class NotRegressive(TSGError):
    pass


class Overflow(TSGError, ArithmeticError):
    pass


# -- grid functions and bounds -------------------------------------------------

class ShapeMismatch(TSGError, ValueError):
    pass


class KernelShapeMismatch(ShapeMismatch):
    pass


class NegativeInput(TSGError, ValueError):
    pass


class HypothesisViolated(TSGError):
    pass


# -- expressions -----------------------------------------------------------------

class ExpressionError(TSGError):
    pass


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifier(ExpressionSyntaxError):
    def __init__(self, name: str, offset: int, source: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, source)


class EvaluationError(ExpressionError):
    pass


# -- scenarios -------------------------------------------------------------------

class ScenarioError(TSGError):
    """Aggregates every validation problem found in a scenario document."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


class ParseError(TSGError):
    pass


class MissingFunction(TSGError):
    def __init__(self, name: str, context: str = ""):
        self.name = name
        msg = f"missing function {name!r}"
        if context:
            msg += f" (required by {context})"
        super().__init__(msg)


class BadScaleSpec(TSGError):
    pass

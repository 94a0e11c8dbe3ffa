# -*- coding: utf-8 -*-
"""Exception hierarchy of the summation engine.

Every exception class carries the CLI exit code it maps to.
"""
from typing import Any


class RhosumError(Exception):
    """Base class of all engine errors."""

    exit_code = 2


# --- input ------------------------------------------------------------------

class ParseError(RhosumError):
    """Syntax error in the textual sum grammar."""

    exit_code = 3

    def __init__(self, message: str, position: int = -1):
        self.position = position
        if position >= 0:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnboundVariable(ParseError):
    """A name is used outside of any binder and is not a declared parameter."""


class NonLinearBound(ParseError):
    """A summation bound is not integer-linear in parameters and outer indices."""


# --- oracle -----------------------------------------------------------------

class OracleError(RhosumError):
    """The brute-force evaluator cannot produce a value."""


class UnboundName(OracleError):
    """A parameter or index has no binding."""


class InfiniteBound(OracleError):
    """The oracle refuses infinite summation bounds."""


# --- towers -----------------------------------------------------------------

class DependentExtension(RhosumError):
    """A candidate generator is expressible in the tower below."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class NotIndefinite(RhosumError):
    """A factor contains a definite sum in the distinguished index."""


class UnsupportedBase(RhosumError):
    """A product ratio is not rational over the ground field."""


class PoleAtPoint(RhosumError):
    """An element is undefined at the requested integer point."""

    def __init__(self, message: str, point: Any = None):
        super().__init__(message)
        self.point = point


# --- solvers ----------------------------------------------------------------

class NoSolution(RhosumError):
    """A telescoping or recurrence solving problem has no solution within the tactic."""


class Incomplete(RhosumError):
    """A bounded search could not decide; the result may be incomplete."""


class ConstraintViolated(RhosumError):
    """The inputs of an assembly step violate its constraint equations."""


class NotFound(RhosumError):
    """No linear constant was found within the search bounds."""


class NonUnitLeading(RhosumError):
    """The leading coefficient of a constant is not invertible in the tower."""


class PoleAtLambda(RhosumError):
    """The evaluation point chosen for a constant hits a pole."""


# --- pipeline ---------------------------------------------------------------

class NoRecurrenceWithinLimits(RhosumError):
    """No recurrence was found below the configured order and time limits."""


class UnresolvedDefiniteSum(RhosumError):
    """A right-hand side keeps a definite sum that strict mode does not accept."""


class RangeViolation(RhosumError):
    """A shift leaves the validity range of a holonomic system."""


class EmptyCore(RhosumError):
    """An exceptional split leaves no summation range."""


class ResourceLimit(RhosumError):
    """The time budget of a call was exhausted."""

    exit_code = 4


class VerificationFailed(RhosumError):
    """A recurrence or certificate has a nonzero residual."""

    exit_code = 1


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_NO_SOLUTION = 2
EXIT_PARSE_ERROR = 3
EXIT_RESOURCE_LIMIT = 4

"""Exception types shared across the package."""

from __future__ import annotations


class NotInvertible(ValueError):
    """Modular inverse requested for a non-unit; carries the offending gcd."""

    def __init__(self, a: int, c: int, gcd: int):
        super().__init__(f"{a} is not invertible mod {c}: gcd = {gcd}")
        self.a = a
        self.c = c
        self.gcd = gcd


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


class ConvergenceError(ArithmeticError):
    """A truncated series or quadrature failed to reach its target accuracy."""


class DegenerateHecke(ArithmeticError):
    """Hecke operator failed to separate eigenforms (clustered eigenvalues)."""


class TableExhausted(LookupError):
    """An eigenvalue was requested beyond the precomputed table range."""


class PoleProximity(ArithmeticError):
    """A quadrature node or argument landed too close to a gamma pole."""


class ContourTruncationError(ConvergenceError):
    """A contour integral's tail estimate exceeded the requested tolerance."""


class AsymptoticRegimeError(ValueError):
    """An asymptotic expansion was requested outside its validity range."""
